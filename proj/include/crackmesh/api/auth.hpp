#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <optional>
#include <string_view>
#include <vector>

#include "crackmesh/common/time.hpp"
#include "crackmesh/coordinator/store.hpp"

namespace crackmesh::api {

/// Argon2id cost parameters and token lifetime.
struct AuthConfig {
  unsigned long long opslimit = 0;
  std::size_t memlimit = 0;
  std::chrono::seconds token_ttl{24 * 3600};

  /// libsodium's interactive limits.
  static AuthConfig interactive();
  /// The cheapest limits libsodium accepts; for tests.
  static AuthConfig minimal();
};

struct Principal {
  UserId id = 0;
  std::string username;
  coordinator::Role role = coordinator::Role::kUser;

  bool admin() const { return role == coordinator::Role::kAdmin; }
};

struct LoginResult {
  std::string token;
  Principal principal;
  TimestampMs expires_at = 0;
};

/// Users with memory-hard password hashes and opaque bearer tokens. Only
/// a keyed digest of each token is stored.
class AuthService {
 public:
  AuthService(coordinator::Store& store, AuthConfig config, Clock clock = system_now_ms);

  /// Throws Error(kInvalidArgument) for an empty username or password and
  /// Error(kConflict) for a taken username.
  UserId create_user(const std::string& username, const std::string& password,
                     coordinator::Role role);

  /// Throws Error(kUnauthorized) for unknown users and wrong passwords alike.
  LoginResult login(const std::string& username, const std::string& password);

  /// Throws Error(kUnauthorized) for unknown, expired or revoked tokens.
  Principal authenticate(std::string_view token) const;

  void revoke(std::string_view token);

  std::vector<coordinator::UserRecord> users() const;
  std::optional<coordinator::UserRecord> user(UserId id) const;

 private:
  std::string token_key(std::string_view token) const;

  coordinator::Store& store_;
  AuthConfig config_;
  Clock clock_;
};

}  // namespace crackmesh::api
