#pragma once

// Multimodal ensemble retriever: an exact scan over stored (image, text)
// vector pairs. Each entry scores
//
//     fused = alpha * cos(q_image, v_image) + (1 - alpha) * cos(q_text, v_text)
//
// and the k best entries are returned ordered by fused score descending, ties
// broken by ascending scenario id. Stored vectors are unit norm; cosine is the
// double-accumulated dot product divided by the exact norms of the stored
// floats, which are computed once per row.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ricl/core/parallel.hpp"
#include "ricl/retrieval/scoring.hpp"

namespace ricl {

struct IndexedEntry {
  std::string scenario_id;
  EmbeddingVector image_vec;
  EmbeddingVector text_vec;
};

struct RetrievalQuery {
  EmbeddingVector image_vec;
  EmbeddingVector text_vec;
  std::size_t k = 1;
  double alpha = 0.4;
};

struct RetrievalHit {
  std::string scenario_id;
  double fused_score = 0.0;
  double image_score = 0.0;
  double text_score = 0.0;
  std::size_t rank = 0;

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

inline constexpr double kUnitNormTolerance = 1e-6;

class MerIndex {
 public:
  MerIndex() = default;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t image_dim() const noexcept { return image_dim_; }
  std::size_t text_dim() const noexcept { return text_dim_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> image_row(std::size_t i) const {
    return {image_.data() + i * image_dim_, image_dim_};
  }
  std::span<const float> text_row(std::size_t i) const {
    return {text_.data() + i * text_dim_, text_dim_};
  }
  bool contains(const std::string& id) const { return id_set_.contains(id); }

  // Entries above this count are scored in parallel chunks.
  static constexpr std::size_t kParallelThreshold = 8192;

  std::vector<RetrievalHit> retrieve(const RetrievalQuery& q) const {
    if (ids_.empty()) throw PreconditionError("retrieve on an empty index");
    if (q.k < 1 || q.k > ids_.size())
      throw PreconditionError("k must be in [1, " + std::to_string(ids_.size()) + "], got " +
                              std::to_string(q.k));
    check_alpha(q.alpha);
    if (q.image_vec.dim() != image_dim_) throw DimensionMismatch(image_dim_, q.image_vec.dim(), "query image");
    if (q.text_vec.dim() != text_dim_) throw DimensionMismatch(text_dim_, q.text_vec.dim(), "query text");

    if (!all_finite(q.image_vec.values) || !all_finite(q.text_vec.values))
      throw PreconditionError("query vector has a non-finite component");
    const std::span<const float> qi = q.image_vec.values;
    const std::span<const float> qt = q.text_vec.values;
    const double qi_norm = l2_norm(qi);
    const double qt_norm = l2_norm(qt);
    if (qi_norm == 0.0 || qt_norm == 0.0) throw PreconditionError("query vector has zero norm");
    const std::size_t n = ids_.size();
    std::vector<double> img(n), txt(n), fused(n);
    auto score_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        img[i] = cosine_from_parts(dot(qi, image_row(i)), qi_norm, image_norm_[i]);
        txt[i] = cosine_from_parts(dot(qt, text_row(i)), qt_norm, text_norm_[i]);
        fused[i] = q.alpha * img[i] + (1.0 - q.alpha) * txt[i];
      }
    };
    if (n < kParallelThreshold) {
      score_range(0, n);
    } else {
      const std::size_t chunks = std::max<std::size_t>(1, std::thread::hardware_concurrency());
      const std::size_t step = (n + chunks - 1) / chunks;
      parallel_for_bounded(chunks, chunks, [&](std::size_t c) {
        score_range(std::min(n, c * step), std::min(n, (c + 1) * step));
      });
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
      if (fused[a] != fused[b]) return fused[a] > fused[b];
      return ids_[a] < ids_[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q.k), order.end(),
                      better);

    std::vector<RetrievalHit> hits;
    hits.reserve(q.k);
    for (std::size_t r = 0; r < q.k; ++r) {
      const auto i = order[r];
      hits.push_back({ids_[i], fused[i], img[i], txt[i], r + 1});
    }
    return hits;
  }

  friend MerIndex build_index(std::span<const IndexedEntry> entries);
  friend class IndexCodec;

 private:
  // Derived state: id set and per-row norms.
  void finalize() {
    id_set_.clear();
    for (const auto& id : ids_)
      if (!id_set_.insert(id).second) throw PreconditionError("duplicate index id '" + id + "'");
    image_norm_.resize(ids_.size());
    text_norm_.resize(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      image_norm_[i] = l2_norm(image_row(i));
      text_norm_[i] = l2_norm(text_row(i));
    }
  }

  std::size_t image_dim_ = 0;
  std::size_t text_dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> image_;  // row-major, size() x image_dim_
  std::vector<float> text_;   // row-major, size() x text_dim_
  std::vector<double> image_norm_;
  std::vector<double> text_norm_;
  std::unordered_set<std::string> id_set_;
};

inline MerIndex build_index(std::span<const IndexedEntry> entries) {
  if (entries.empty()) throw PreconditionError("build_index: no entries");
  MerIndex idx;
  idx.image_dim_ = entries.front().image_vec.dim();
  idx.text_dim_ = entries.front().text_vec.dim();
  if (idx.image_dim_ == 0 || idx.text_dim_ == 0) throw PreconditionError("build_index: zero dimension");
  idx.ids_.reserve(entries.size());
  idx.image_.reserve(entries.size() * idx.image_dim_);
  idx.text_.reserve(entries.size() * idx.text_dim_);
  for (const auto& e : entries) {
    if (e.image_vec.dim() != idx.image_dim_)
      throw DimensionMismatch(idx.image_dim_, e.image_vec.dim(), "image vector of '" + e.scenario_id + "'");
    if (e.text_vec.dim() != idx.text_dim_)
      throw DimensionMismatch(idx.text_dim_, e.text_vec.dim(), "text vector of '" + e.scenario_id + "'");
    for (const auto* v : {&e.image_vec, &e.text_vec}) {
      if (!all_finite(v->values) || std::abs(l2_norm(v->values) - 1.0) > kUnitNormTolerance)
        throw PreconditionError("entry '" + e.scenario_id + "' has a vector that is not unit norm");
    }
    idx.ids_.push_back(e.scenario_id);
    idx.image_.insert(idx.image_.end(), e.image_vec.values.begin(), e.image_vec.values.end());
    idx.text_.insert(idx.text_.end(), e.text_vec.values.begin(), e.text_vec.values.end());
  }
  idx.finalize();
  return idx;
}

inline MerIndex build_index(const std::vector<IndexedEntry>& entries) {
  return build_index(std::span<const IndexedEntry>(entries));
}

}  // namespace ricl
