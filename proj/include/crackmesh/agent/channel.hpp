#pragma once

#include <functional>
#include <memory>
#include <string>

namespace crackmesh::agent {

/// Callbacks run on the transport's thread and must return quickly.
struct ChannelHandlers {
  std::function<void(std::string)> on_frame;
  std::function<void()> on_closed;
};

/// One live connection to the coordinator.
class AgentChannel {
 public:
  virtual ~AgentChannel() = default;
  /// False once the channel is closed.
  virtual bool send(const std::string& frame) = 0;
  virtual void close() = 0;
};

class Connector {
 public:
  virtual ~Connector() = default;
  /// Null when the coordinator is unreachable.
  virtual std::unique_ptr<AgentChannel> connect(ChannelHandlers handlers) = 0;
};

}  // namespace crackmesh::agent
