#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "crackmesh/api/service.hpp"
#include "crackmesh/coordinator/coordinator.hpp"

namespace crackmesh::net {

struct ServerOptions {
  std::string address = "0.0.0.0";
  /// 0 picks an ephemeral port.
  std::uint16_t port = 8080;
  unsigned threads = 2;
  std::size_t max_body_bytes = 64u << 20;
  std::size_t max_frame_bytes = 64u << 20;
};

/// HTTP plus the two websocket endpoints: /ws/agent for agents and
/// /ws/ui?job=<id>&token=<t> for dashboard subscribers. Everything else goes
/// to the ApiService.
class Server {
 public:
  /// Binds and starts serving. Throws Error(kNetwork) when the address
  /// cannot be bound.
  Server(coordinator::Coordinator& coordinator, const api::ApiService& api,
         ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;

  /// Drops every connection and joins the I/O threads. Idempotent.
  void stop();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace crackmesh::net
