#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ricl/core/error.hpp"

namespace ricl {

struct EmbeddingVector {
  std::vector<float> values;
  bool normalized = false;

  std::size_t dim() const noexcept { return values.size(); }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

inline bool all_finite(std::span<const float> v) {
  for (float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double l2_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

// Scales raw provider output to unit L2 norm. Arithmetic is done in double and
// rounded once to float.
template <typename T>
EmbeddingVector normalize(std::span<const T> raw) {
  double s = 0.0;
  for (T x : raw) {
    const double d = static_cast<double>(x);
    if (!std::isfinite(d)) throw ProviderError("embedding contains a non-finite component");
    s += d * d;
  }
  const double norm = std::sqrt(s);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ProviderError("embedding has zero or infinite norm");
  EmbeddingVector out;
  out.values.reserve(raw.size());
  for (T x : raw) out.values.push_back(static_cast<float>(static_cast<double>(x) / norm));
  out.normalized = true;
  return out;
}

inline EmbeddingVector normalize(const std::vector<double>& raw) {
  return normalize(std::span<const double>(raw));
}
inline EmbeddingVector normalize(const std::vector<float>& raw) {
  return normalize(std::span<const float>(raw));
}

inline bool is_unit(const EmbeddingVector& v, double tol = 1e-6) {
  return std::abs(l2_norm(v.values) - 1.0) <= tol;
}

}  // namespace ricl
