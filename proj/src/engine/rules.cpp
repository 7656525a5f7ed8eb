#include "crackmesh/engine/rules.hpp"

#include <algorithm>

#include "crackmesh/common/error.hpp"

namespace crackmesh::engine {
namespace {

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

}  // namespace

Rule Rule::parse(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kRuleParse, "empty rule", "rules");
  Rule rule;
  rule.text_ = std::string(text);
  for (std::size_t i = 0; i < text.size(); ++i) {
    char code = text[i];
    switch (code) {
      case ':':
      case 'l':
      case 'u':
      case 'c':
      case 'r':
      case 'd':
        rule.ops_.push_back({code, 0});
        break;
      case '$':
      case '^':
        if (i + 1 >= text.size()) {
          throw Error(ErrorCode::kRuleParse,
                      "op '" + std::string(1, code) + "' at offset " + std::to_string(i) +
                          " is missing its argument",
                      "rules");
        }
        rule.ops_.push_back({code, text[i + 1]});
        ++i;
        break;
      default:
        throw Error(ErrorCode::kRuleParse,
                    "unknown rule op at offset " + std::to_string(i) + " in '" +
                        std::string(text) + "'",
                    "rules");
    }
  }
  return rule;
}

std::string Rule::apply(std::string_view word) const {
  std::string w(word);
  for (const auto& op : ops_) {
    switch (op.code) {
      case ':':
        break;
      case 'l':
        std::transform(w.begin(), w.end(), w.begin(), lower);
        break;
      case 'u':
        std::transform(w.begin(), w.end(), w.begin(), upper);
        break;
      case 'c':
        std::transform(w.begin(), w.end(), w.begin(), lower);
        if (!w.empty()) w[0] = upper(w[0]);
        break;
      case 'r':
        std::reverse(w.begin(), w.end());
        break;
      case 'd':
        w += std::string(w);
        break;
      case '$':
        w.push_back(op.arg);
        break;
      case '^':
        w.insert(w.begin(), op.arg);
        break;
    }
  }
  return w;
}

std::vector<Rule> parse_rules(const std::vector<std::string>& texts) {
  std::vector<Rule> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Rule::parse(t));
  return out;
}

}  // namespace crackmesh::engine
