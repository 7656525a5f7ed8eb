#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crackmesh::api {

struct HttpRequest {
  std::string method;
  /// Path plus optional query, e.g. "/jobs/3?x=1".
  std::string target;
  /// Lowercase header names.
  std::map<std::string, std::string> headers;
  std::string body;

  std::string_view path() const;
  std::optional<std::string> query(std::string_view key) const;
  std::optional<std::string> header(const std::string& lowercase_name) const;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Percent-decoding for query components ('+' becomes a space).
std::string url_decode(std::string_view text);

struct MultipartPart {
  std::string name;
  std::optional<std::string> filename;
  std::string content_type;
  std::string body;
};

/// Extracts the boundary parameter of a multipart/form-data content type.
std::optional<std::string> multipart_boundary(std::string_view content_type);

/// Splits a multipart/form-data body. Throws Error(kBadRequest) when
/// the body is not well formed.
std::vector<MultipartPart> parse_multipart(std::string_view body, std::string_view boundary);

}  // namespace crackmesh::api
