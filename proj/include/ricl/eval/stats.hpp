#pragma once

// Corpus statistics: token lengths and n-gram entropy (bits) over the
// core tokenizer's word-level tokens.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/rng.hpp"
#include "ricl/core/tokenizer.hpp"

namespace ricl {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Population mean and standard deviation (divisor N).
inline MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) throw PreconditionError("mean_std of an empty sample");
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return {xs.front(), 0.0};
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

inline MeanStd length_stats(std::span<const std::string> texts) {
  if (texts.empty()) throw PreconditionError("length_stats of no explanations");
  std::vector<double> lens;
  lens.reserve(texts.size());
  for (const auto& t : texts) lens.push_back(static_cast<double>(count_tokens(t)));
  return mean_std(lens);
}

namespace detail {

inline double entropy_of_counts(const std::unordered_map<std::string, std::size_t>& counts, std::size_t total) {
  double h = 0.0;
  for (const auto& [gram, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;  // -0.0 for a single gram
}

}  // namespace detail

// Shannon entropy of the pooled order-n token n-gram distribution.
template <typename Texts>
double ngram_entropy(const Texts& texts, std::size_t n) {
  if (n < 1) throw PreconditionError("n-gram order must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& text : texts) {
    const auto toks = tokenize(text);
    if (toks.size() < n) continue;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      std::string key;
      for (std::size_t k = 0; k < n; ++k) {
        if (k) key.push_back('\x1f');
        key += toks[i + k];
      }
      ++counts[key];
      ++total;
    }
  }
  if (total == 0) throw PreconditionError("every text is shorter than n=" + std::to_string(n));
  return detail::entropy_of_counts(counts, total);
}

inline constexpr std::size_t kMaxEntropyOrder = 5;

// Per n in 1..5: mean and population std of ngram_entropy over bootstrap
// iterations, each drawing one explanation per record.
inline std::map<std::size_t, MeanStd> bootstrap_entropy(const std::map<std::string, std::vector<std::string>>& pairs,
                                                        std::size_t iterations, RngSeed seed) {
  if (pairs.empty()) throw PreconditionError("bootstrap_entropy needs at least one record");
  if (iterations == 0) throw PreconditionError("bootstrap_entropy needs at least one iteration");
  for (const auto& [id, texts] : pairs)
    if (texts.empty()) throw PreconditionError("record " + id + " has no explanations");
  Rng rng(seed);
  std::map<std::size_t, std::vector<double>> samples;
  std::vector<const std::string*> pick(pairs.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    std::size_t r = 0;
    for (const auto& [id, texts] : pairs) pick[r++] = &texts[static_cast<std::size_t>(rng.below(texts.size()))];
    std::vector<std::string_view> chosen;
    chosen.reserve(pick.size());
    for (const auto* p : pick) chosen.emplace_back(*p);
    for (std::size_t n = 1; n <= kMaxEntropyOrder; ++n) samples[n].push_back(ngram_entropy(chosen, n));
  }
  std::map<std::size_t, MeanStd> out;
  for (auto& [n, xs] : samples) out[n] = mean_std(xs);
  return out;
}

struct CorpusStats {
  std::string group;
  double mean_tokens = 0.0;
  double std_tokens = 0.0;
  std::map<std::size_t, MeanStd> entropy;
  std::size_t sample_count = 0;
  std::vector<std::size_t> lengths;  // token count per explanation, for histograms
};

inline CorpusStats corpus_stats(std::string group, const std::map<std::string, std::vector<std::string>>& pairs,
                                std::size_t iterations, RngSeed seed) {
  CorpusStats s;
  s.group = std::move(group);
  std::vector<std::string> all;
  for (const auto& [id, texts] : pairs) all.insert(all.end(), texts.begin(), texts.end());
  const auto ls = length_stats(all);
  s.mean_tokens = ls.mean;
  s.std_tokens = ls.std;
  s.sample_count = all.size();
  for (const auto& t : all) s.lengths.push_back(count_tokens(t));
  s.entropy = bootstrap_entropy(pairs, iterations, seed);
  return s;
}

// group,tokens,count
inline std::string length_histogram_csv(std::span<const CorpusStats> groups) {
  std::string out = "group,tokens,count\n";
  for (const auto& g : groups) {
    std::map<std::size_t, std::size_t> hist;
    for (auto l : g.lengths) ++hist[l];
    for (const auto& [len, c] : hist) out += g.group + "," + std::to_string(len) + "," + std::to_string(c) + "\n";
  }
  return out;
}

// group,n,mean,std
inline std::string entropy_curve_csv(std::span<const CorpusStats> groups) {
  std::string out = "group,n,mean,std\n";
  char buf[64];
  for (const auto& g : groups)
    for (const auto& [n, ms] : g.entropy) {
      std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f\n", n, ms.mean, ms.std);
      out += g.group + buf;
    }
  return out;
}

}  // namespace ricl
