#include "crackmesh/common/bigint.hpp"

namespace crackmesh {

BigInt keyspace_size(unsigned length) {
  return boost::multiprecision::pow(BigInt(kCharsetSize), length);
}

std::string to_decimal(const BigInt& value) { return value.str(); }

bool parse_decimal(std::string_view text, BigInt& out) {
  if (text.empty()) return false;
  BigInt acc = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    acc *= 10;
    acc += static_cast<unsigned>(c - '0');
  }
  out = std::move(acc);
  return true;
}

}  // namespace crackmesh
