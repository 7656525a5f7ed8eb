#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crackmesh::engine {

/// A parsed mangling rule over the core op subset:
///   :  no-op          l  lowercase       u  uppercase
///   c  capitalize     r  reverse         d  duplicate
///   $X append byte X  ^X prepend byte X
/// Ops run left to right. Case ops touch ASCII letters only.
class Rule {
 public:
  /// Throws Error(kRuleParse) naming the byte offset of the first bad op.
  static Rule parse(std::string_view text);

  std::string apply(std::string_view word) const;
  const std::string& text() const noexcept { return text_; }

 private:
  struct Op {
    char code;
    char arg;
  };
  std::vector<Op> ops_;
  std::string text_;
};

std::vector<Rule> parse_rules(const std::vector<std::string>& texts);

}  // namespace crackmesh::engine
