#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace crackmesh {

/// Lowercase hex of arbitrary bytes.
std::string hex_encode(std::string_view bytes);

/// Accepts upper or lower case; nullopt on odd length or a non-hex byte.
std::optional<std::string> hex_decode(std::string_view hex);

bool is_hex_digit(char c) noexcept;

/// Printable ASCII passes through; backslash and every other byte become
/// `\xHH`.
std::string escape_bytes(std::string_view bytes);

}  // namespace crackmesh
