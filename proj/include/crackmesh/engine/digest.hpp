#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "crackmesh/domain/types.hpp"

namespace crackmesh::engine {

inline constexpr std::size_t kMaxDigestBytes = 32;

/// Raw digest bytes, zero-padded past `digest_hex_length / 2`.
using RawDigest = std::array<std::uint8_t, kMaxDigestBytes>;

/// Reusable hashing context for one algorithm; not thread-safe, one per lane.
class Digester {
 public:
  explicit Digester(HashAlgorithm algorithm);
  ~Digester();
  Digester(const Digester&) = delete;
  Digester& operator=(const Digester&) = delete;
  Digester(Digester&& other) noexcept;
  Digester& operator=(Digester&& other) noexcept;

  HashAlgorithm algorithm() const noexcept { return algorithm_; }
  std::size_t digest_size() const noexcept { return size_; }

  RawDigest raw(std::string_view input);
  HexDigest hex(std::string_view input);

 private:
  HashAlgorithm algorithm_;
  std::size_t size_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot lowercase hex digest.
HexDigest digest(HashAlgorithm algorithm, std::string_view input);

/// Raw bytes of a parsed hex digest, zero-padded.
RawDigest to_raw(const HexDigest& digest);

}  // namespace crackmesh::engine
