#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "crackmesh/agent/channel.hpp"

namespace crackmesh::net {

/// Dials `ws://host:port/ws/agent` once per connect() call.
class WebSocketConnector : public agent::Connector {
 public:
  explicit WebSocketConnector(std::string url,
                              std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));

  std::unique_ptr<agent::AgentChannel> connect(agent::ChannelHandlers handlers) override;

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

struct HttpResult {
  int status = 0;
  std::string content_type;
  std::string body;
};

/// One blocking request against `base_url` (`http://host:port`). Throws
/// Error(kNetwork) when the server cannot be reached.
HttpResult http_request(const std::string& base_url, const std::string& method,
                        const std::string& target, const std::map<std::string, std::string>& headers,
                        const std::string& body,
                        std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace crackmesh::net
