#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "ricl/core/error.hpp"

namespace ricl {

inline std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = text.find(from, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

// Placeholders are {name} with name in [a-z_][a-z0-9_]*. Every placeholder in the
// template must have a value; substituted values are not rescanned.
inline std::string render_placeholders(std::string_view tmpl,
                                       const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      auto name_char = [&](char c, bool lead) {
        return (c >= 'a' && c <= 'z') || c == '_' || (!lead && c >= '0' && c <= '9');
      };
      while (j < tmpl.size() && name_char(tmpl[j], j == i + 1)) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        const auto name = tmpl.substr(i + 1, j - i - 1);
        auto it = values.find(name);
        if (it == values.end())
          throw PreconditionError("unresolved placeholder {" + std::string(name) + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace ricl
