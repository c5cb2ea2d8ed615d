#pragma once

// Word tokenizer used by every length and diversity statistic.
//
// Rule:
//   1. Split on ASCII whitespace (space, \t, \n, \v, \f, \r).
//   2. In each chunk, every leading ASCII punctuation character becomes its
//      own token, as does every trailing one. The remaining core (which may
//      contain inner punctuation, e.g. "don't", "3.5", "e-mail") is one token.
//
// "don't stop, now!" -> [don't] [stop] [,] [now] [!]  (5 tokens)
// Bytes >= 0x80 are never punctuation, so UTF-8 words stay intact.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ricl {

constexpr bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

constexpr bool is_ascii_punct(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x7B && u <= 0x7E);
}

template <typename Sink>
void for_each_token(std::string_view text, Sink&& sink) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_ascii_space(text[i])) ++i;
    std::size_t end = i;
    while (end < n && !is_ascii_space(text[end])) ++end;
    if (end == i) break;

    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && is_ascii_punct(text[lo])) {
      sink(text.substr(lo, 1));
      ++lo;
    }
    std::size_t core_end = hi;
    while (core_end > lo && is_ascii_punct(text[core_end - 1])) --core_end;
    if (core_end > lo) sink(text.substr(lo, core_end - lo));
    for (std::size_t p = core_end; p < hi; ++p) sink(text.substr(p, 1));
    i = end;
  }
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for_each_token(text, [&](std::string_view tok) { out.emplace_back(tok); });
  return out;
}

inline std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  for_each_token(text, [&](std::string_view) { ++n; });
  return n;
}

}  // namespace ricl
