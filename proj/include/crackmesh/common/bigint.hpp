#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace crackmesh {

using BigInt = boost::multiprecision::cpp_int;

/// Printable-ASCII alphabet size; every brute-force keyspace is a power of it.
inline constexpr unsigned kCharsetSize = 95;

/// 95^length, exact.
BigInt keyspace_size(unsigned length);

std::string to_decimal(const BigInt& value);

/// Parses a non-negative decimal integer; returns false on any non-digit
/// byte or an empty string.
bool parse_decimal(std::string_view text, BigInt& out);

}  // namespace crackmesh
