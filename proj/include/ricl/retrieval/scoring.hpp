#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "ricl/core/error.hpp"
#include "ricl/embedding/vector.hpp"

namespace ricl {

inline double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

// dot / (|a| |b|) in double, clamped to [-1, 1]. Vectors leave the gateway
// unit norm, but only to float precision; dividing by the exact norms of the
// stored floats keeps cos(u, u) == 1 to double precision.
inline double cosine_from_parts(double dot_ab, double norm_a, double norm_b) noexcept {
  return std::clamp(dot_ab / (norm_a * norm_b), -1.0, 1.0);
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  if (!all_finite(a.values) || !all_finite(b.values))
    throw PreconditionError("cosine_similarity: non-finite component");
  const double na = l2_norm(a.values);
  const double nb = l2_norm(b.values);
  if (na == 0.0 || nb == 0.0) throw PreconditionError("cosine_similarity: zero vector");
  return cosine_from_parts(dot(a.values, b.values), na, nb);
}

inline void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw PreconditionError("alpha must be in [0, 1], got " + std::to_string(alpha));
}

// alpha * image_score + (1 - alpha) * text_score
inline double fuse(double image_score, double text_score, double alpha) {
  check_alpha(alpha);
  return alpha * image_score + (1.0 - alpha) * text_score;
}

}  // namespace ricl
