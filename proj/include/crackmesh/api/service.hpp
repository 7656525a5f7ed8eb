#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "crackmesh/api/auth.hpp"
#include "crackmesh/api/http.hpp"
#include "crackmesh/common/error.hpp"
#include "crackmesh/coordinator/coordinator.hpp"

namespace crackmesh::api {

struct ApiConfig {
  /// Root of the dashboard bundle; empty disables static serving.
  std::filesystem::path static_dir;
};

/// `hash,plaintext,cracked_at,node` rows ordered by cracked_at. Plaintext is
/// always quoted, quotes doubled, bytes outside printable ASCII and the
/// backslash itself written as \xHH. LF line endings.
std::string export_csv(const std::vector<CrackedResult>& results);

nlohmann::json node_json(const NodeProfile& node);
nlohmann::json job_json(const Job& job, const coordinator::JobStats& stats);
nlohmann::json usage_json(const coordinator::UsageStats& usage);

/// The HTTP surface: a pure request → response function over the
/// coordinator, safe to call from any number of threads.
class ApiService {
 public:
  ApiService(coordinator::Coordinator& coordinator, AuthService& auth, ApiConfig config = {});

  HttpResponse handle(const HttpRequest& request) const;

  /// Admission check for a /ws/ui?job=<id>&token=<t> upgrade. The token may
  /// also come as a bearer header. Throws Error(kUnauthorized),
  /// Error(kForbidden), Error(kUnknownJob) or Error(kInvalidArgument).
  JobId authorize_ui(const HttpRequest& request) const;

 private:
  HttpResponse route(const HttpRequest& request) const;
  HttpResponse serve_static(const HttpRequest& request) const;
  Principal require_auth(const HttpRequest& request) const;
  Job owned_job(const Principal& who, const std::string& id_text) const;
  HttpResponse submit(const Principal& who, const HttpRequest& request) const;

  coordinator::Coordinator& coordinator_;
  AuthService& auth_;
  ApiConfig config_;
};

/// Uniform error body {code, message, field?} with the matching status.
HttpResponse error_response(const std::exception& error);

int http_status_for(ErrorCode code) noexcept;

}  // namespace crackmesh::api
