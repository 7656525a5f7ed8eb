#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace crackmesh::net {

struct Endpoint {
  std::string scheme;  // "http" | "ws"
  std::string host;
  std::uint16_t port = 80;
  /// Path plus query; "/" when the URL has none.
  std::string target = "/";
};

/// Parses `scheme://host[:port][/target]` for http and ws. Throws
/// Error(kInvalidArgument).
Endpoint parse_url(std::string_view url);

/// Parses `host:port` or `:port` (any interface). Throws Error(kInvalidArgument).
Endpoint parse_listen(std::string_view address);

}  // namespace crackmesh::net
