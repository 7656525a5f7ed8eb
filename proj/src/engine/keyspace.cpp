#include "crackmesh/engine/keyspace.hpp"

#include "crackmesh/common/error.hpp"

namespace crackmesh::engine {

std::string index_to_candidate(unsigned length, const BigInt& index) {
  if (index < 0 || index >= keyspace_size(length)) {
    throw Error(ErrorCode::kIndexOutOfRange, "candidate index outside keyspace", "index");
  }
  std::string out(length, charset_byte(0));
  BigInt rest = index;
  for (unsigned pos = length; pos-- > 0 && rest > 0;) {
    auto digit = static_cast<unsigned>(rest % kCharsetSize);
    rest /= kCharsetSize;
    out[pos] = charset_byte(digit);
  }
  return out;
}

BigInt candidate_to_index(std::string_view candidate) {
  BigInt index = 0;
  for (char c : candidate) {
    auto b = static_cast<unsigned char>(c);
    if (b < 0x20 || b > 0x7e) {
      throw Error(ErrorCode::kIndexOutOfRange, "byte outside printable charset", "candidate");
    }
    index *= kCharsetSize;
    index += b - 0x20u;
  }
  return index;
}

}  // namespace crackmesh::engine
