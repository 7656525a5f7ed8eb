#include "crackmesh/net/url.hpp"

#include <charconv>

#include "crackmesh/common/error.hpp"

namespace crackmesh::net {

namespace {

std::uint16_t parse_port(std::string_view text, std::string_view whole) {
  unsigned v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size() || v > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + std::string(whole) + "'", "port");
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

Endpoint parse_url(std::string_view url) {
  Endpoint ep;
  auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "URL needs a scheme: '" + std::string(url) + "'", "url");
  }
  ep.scheme = std::string(url.substr(0, sep));
  if (ep.scheme != "http" && ep.scheme != "ws") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported scheme '" + ep.scheme + "'", "url");
  }
  auto rest = url.substr(sep + 3);
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    ep.target = std::string(rest.substr(slash));
    if (ep.target.front() == '?') ep.target.insert(0, "/");
  }
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    ep.port = parse_port(authority.substr(colon + 1), url);
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "URL has no host: '" + std::string(url) + "'", "url");
  }
  ep.host = std::string(authority);
  return ep;
}

Endpoint parse_listen(std::string_view address) {
  Endpoint ep;
  ep.scheme = "http";
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "listen address needs host:port", "listen");
  }
  ep.host = colon == 0 ? "0.0.0.0" : std::string(address.substr(0, colon));
  ep.port = parse_port(address.substr(colon + 1), address);
  return ep;
}

}  // namespace crackmesh::net
