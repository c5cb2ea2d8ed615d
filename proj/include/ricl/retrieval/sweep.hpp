#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "ricl/retrieval/index.hpp"

namespace ricl {

struct SweepRow {
  double alpha = 0.0;
  double metric = 0.0;
  std::size_t queries = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// Inclusive grid lo, lo+step, ..., hi computed from integer steps so the
// endpoints are exact.
inline std::vector<double> alpha_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw PreconditionError("alpha_grid: invalid range");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return out;
}

template <typename Metric>
concept SweepMetric = requires(Metric m, double alpha, std::span<const std::vector<RetrievalHit>> hits) {
  { m(alpha, hits) } -> std::convertible_to<double>;
};

// For each alpha, retrieves every query at that alpha and hands the hit lists
// to `metric` (e.g. the judged win rate of a run using those exemplars).
template <SweepMetric Metric>
std::vector<SweepRow> alpha_sweep(const MerIndex& index, std::span<const RetrievalQuery> queries,
                                  std::span<const double> alphas, Metric&& metric) {
  if (alphas.empty()) throw PreconditionError("alpha_sweep: no alphas");
  for (double a : alphas) check_alpha(a);
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) {
    std::vector<std::vector<RetrievalHit>> hits;
    hits.reserve(queries.size());
    for (auto q : queries) {
      q.alpha = a;
      hits.push_back(index.retrieve(q));
    }
    rows.push_back({a, static_cast<double>(metric(a, std::span<const std::vector<RetrievalHit>>(hits))),
                    queries.size()});
  }
  return rows;
}

}  // namespace ricl
