#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ricl/core/error.hpp"

namespace ricl {

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t removed_duplicates = 0;
  std::size_t removed_by_keyword = 0;
  std::map<std::string, std::size_t> keyword_counts;
  std::size_t output_count = 0;

  bool balanced() const {
    return output_count + removed_duplicates + removed_by_keyword == input_count;
  }

  // Chains the report of a later stage onto this one.
  FilterReport then(const FilterReport& next) const {
    FilterReport r = *this;
    r.removed_duplicates += next.removed_duplicates;
    r.removed_by_keyword += next.removed_by_keyword;
    for (const auto& [k, v] : next.keyword_counts) r.keyword_counts[k] = v;
    r.output_count = next.output_count;
    return r;
  }
};

struct CaptionOf {
  template <typename T>
  const std::string& operator()(const T& item) const {
    return item.caption;
  }
};

namespace detail {

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Sorted distinct character trigrams of the ASCII-lowercased text; strings
// shorter than three bytes contribute themselves as a single gram.
inline std::vector<std::string> trigram_set(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), ascii_lower);
  std::vector<std::string> grams;
  if (s.size() < 3) {
    grams.push_back(s);
    return grams;
  }
  grams.reserve(s.size() - 2);
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) grams.push_back(s.substr(i, 3));
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

inline std::vector<std::string> words_lower(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && is_word_byte(text[j])) ++j;
    if (j > i) {
      std::string w(text.substr(i, j - i));
      std::transform(w.begin(), w.end(), w.begin(), ascii_lower);
      out.push_back(std::move(w));
    }
    i = j;
  }
  return out;
}

}  // namespace detail

inline double trigram_jaccard(std::string_view a, std::string_view b) {
  return detail::jaccard(detail::trigram_set(a), detail::trigram_set(b));
}

// Keeps an item unless its caption's trigram Jaccard with an already kept
// item is >= threshold, so the earliest item of each duplicate cluster
// survives.
template <typename T, typename Proj = CaptionOf>
std::pair<std::vector<T>, FilterReport> dedupe(std::vector<T> items, double threshold = 0.8,
                                               Proj caption = {}) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw PreconditionError("dedupe threshold must be in (0, 1]");
  FilterReport report;
  report.input_count = items.size();
  std::vector<T> kept;
  std::vector<std::vector<std::string>> kept_grams;
  for (auto& item : items) {
    auto grams = detail::trigram_set(caption(item));
    const bool dup = std::any_of(kept_grams.begin(), kept_grams.end(), [&](const auto& g) {
      return detail::jaccard(g, grams) >= threshold;
    });
    if (dup) {
      ++report.removed_duplicates;
      continue;
    }
    kept_grams.push_back(std::move(grams));
    kept.push_back(std::move(item));
  }
  report.output_count = kept.size();
  return {std::move(kept), std::move(report)};
}

// True when the word sequence of `keyword` occurs contiguously in `text`,
// ASCII case-insensitive, on word boundaries.
inline bool contains_keyword(std::string_view text, std::string_view keyword) {
  const auto hay = detail::words_lower(text);
  const auto needle = detail::words_lower(keyword);
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Caps keyword frequency: after filtering, fewer than `cap` kept captions
// contain any given keyword. Items are visited in order and an item is
// dropped when keeping it would bring one of its keywords to `cap`, so the
// latest occurrences go first.
template <typename T, typename Proj = CaptionOf>
std::pair<std::vector<T>, FilterReport> keyword_diversity_filter(std::vector<T> items,
                                                                 const std::vector<std::string>& keywords,
                                                                 long cap = 20, Proj caption = {}) {
  if (cap < 0) throw PreconditionError("keyword cap must be >= 0");
  for (const auto& k : keywords)
    if (std::any_of(k.begin(), k.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
      throw PreconditionError("keyword '" + k + "' must be lowercase");
  FilterReport report;
  report.input_count = items.size();
  for (const auto& k : keywords) report.keyword_counts[k] = 0;
  std::vector<T> kept;
  for (auto& item : items) {
    std::vector<const std::string*> present;
    for (const auto& k : keywords)
      if (contains_keyword(caption(item), k)) present.push_back(&k);
    const bool over = std::any_of(present.begin(), present.end(), [&](const std::string* k) {
      return static_cast<long>(report.keyword_counts[*k]) + 1 >= cap;
    });
    if (over) {
      ++report.removed_by_keyword;
      continue;
    }
    for (const auto* k : present) ++report.keyword_counts[*k];
    kept.push_back(std::move(item));
  }
  report.output_count = kept.size();
  return {std::move(kept), std::move(report)};
}

// One keyword per line; blank lines and '#' comments ignored; lowercased.
inline std::vector<std::string> load_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open keyword file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string k = line.substr(b, e - b + 1);
    std::transform(k.begin(), k.end(), k.begin(), detail::ascii_lower);
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace ricl
