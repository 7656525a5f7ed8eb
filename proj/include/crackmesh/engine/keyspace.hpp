#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "crackmesh/common/bigint.hpp"

namespace crackmesh::engine {

/// Printable ASCII 0x20..0x7E in ascending byte order.
inline constexpr char kCharsetFirst = 0x20;

constexpr char charset_byte(unsigned index) noexcept {
  return static_cast<char>(kCharsetFirst + static_cast<int>(index));
}

/// Big-endian base-95 expansion of `index`, left-padded to `length` digits.
/// Throws Error(kIndexOutOfRange) unless 0 <= index < 95^length.
std::string index_to_candidate(unsigned length, const BigInt& index);

/// Inverse of index_to_candidate. Throws Error(kIndexOutOfRange) for a byte
/// outside the charset.
BigInt candidate_to_index(std::string_view candidate);

}  // namespace crackmesh::engine
