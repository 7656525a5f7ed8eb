#include "crackmesh/api/auth.hpp"

#include <sodium.h>

#include <array>
#include <mutex>

#include "crackmesh/common/error.hpp"
#include "crackmesh/common/hex.hpp"

namespace crackmesh::api {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(ErrorCode::kStorage, "libsodium failed to initialize");
  });
}

Error unauthorized() { return Error(ErrorCode::kUnauthorized, "invalid credentials"); }

}  // namespace

AuthConfig AuthConfig::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE,
          std::chrono::hours(24)};
}

AuthConfig AuthConfig::minimal() {
  return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN, std::chrono::hours(24)};
}

AuthService::AuthService(coordinator::Store& store, AuthConfig config, Clock clock)
    : store_(store), config_(config), clock_(std::move(clock)) {
  ensure_sodium();
  if (config_.opslimit == 0) config_.opslimit = crypto_pwhash_OPSLIMIT_INTERACTIVE;
  if (config_.memlimit == 0) config_.memlimit = crypto_pwhash_MEMLIMIT_INTERACTIVE;
}

UserId AuthService::create_user(const std::string& username, const std::string& password,
                                coordinator::Role role) {
  if (username.empty()) throw Error(ErrorCode::kInvalidArgument, "username is empty", "username");
  if (password.empty()) throw Error(ErrorCode::kInvalidArgument, "password is empty", "password");
  std::array<char, crypto_pwhash_STRBYTES> out{};
  if (crypto_pwhash_str(out.data(), password.data(), password.size(), config_.opslimit,
                        config_.memlimit) != 0) {
    throw Error(ErrorCode::kStorage, "password hashing ran out of memory");
  }
  return store_.create_user(username, out.data(), role);
}

LoginResult AuthService::login(const std::string& username, const std::string& password) {
  auto user = store_.find_user_by_name(username);
  if (!user) {
    // Burn comparable time so unknown names are not distinguishable.
    std::array<char, crypto_pwhash_STRBYTES> out{};
    (void)!crypto_pwhash_str(out.data(), password.data(), password.size(), config_.opslimit,
                             config_.memlimit);
    throw unauthorized();
  }
  if (crypto_pwhash_str_verify(user->credential.c_str(), password.data(), password.size()) != 0) {
    throw unauthorized();
  }
  std::array<unsigned char, 32> raw{};
  randombytes_buf(raw.data(), raw.size());
  LoginResult result;
  result.token = hex_encode(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
  result.principal = {user->id, user->username, user->role};
  result.expires_at =
      clock_() + std::chrono::duration_cast<std::chrono::milliseconds>(config_.token_ttl).count();
  store_.put_token({token_key(result.token), user->id, result.expires_at, false});
  return result;
}

Principal AuthService::authenticate(std::string_view token) const {
  if (token.empty()) throw Error(ErrorCode::kUnauthorized, "missing token");
  auto record = store_.find_token(token_key(token));
  if (!record || record->revoked) throw Error(ErrorCode::kUnauthorized, "invalid token");
  if (record->expires_at <= clock_()) throw Error(ErrorCode::kUnauthorized, "token expired");
  auto user = store_.find_user(record->user_id);
  if (!user) throw Error(ErrorCode::kUnauthorized, "invalid token");
  return {user->id, user->username, user->role};
}

void AuthService::revoke(std::string_view token) { store_.revoke_token(token_key(token)); }

std::vector<coordinator::UserRecord> AuthService::users() const { return store_.list_users(); }

std::optional<coordinator::UserRecord> AuthService::user(UserId id) const {
  return store_.find_user(id);
}

std::string AuthService::token_key(std::string_view token) const {
  std::array<unsigned char, crypto_generichash_BYTES> digest{};
  crypto_generichash(digest.data(), digest.size(),
                     reinterpret_cast<const unsigned char*>(token.data()), token.size(), nullptr,
                     0);
  return hex_encode(
      std::string_view(reinterpret_cast<const char*>(digest.data()), digest.size()));
}

}  // namespace crackmesh::api
