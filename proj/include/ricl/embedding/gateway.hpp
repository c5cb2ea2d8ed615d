#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "ricl/core/hash.hpp"
#include "ricl/core/parallel.hpp"
#include "ricl/core/record.hpp"
#include "ricl/embedding/cache.hpp"
#include "ricl/embedding/image_prep.hpp"
#include "ricl/embedding/provider.hpp"
#include "ricl/embedding/vector.hpp"

namespace ricl {

// Text embedded for a record on both the index and the query side: the
// outcome, which is what the model is asked to explain.
inline const std::string& retrieval_text(const ScenarioRecord& r) { return r.outcome; }

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t failures = 0;
  std::vector<std::string> failed_ids;

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

struct RecordEmbeddings {
  EmbeddingVector image;
  EmbeddingVector text;
};

class EmbeddingGateway {
 public:
  EmbeddingGateway(ProviderConfig config, std::shared_ptr<EmbeddingProvider> text_provider,
                   std::shared_ptr<EmbeddingProvider> image_provider,
                   std::shared_ptr<EmbeddingCache> cache = std::make_shared<EmbeddingCache>(),
                   std::filesystem::path image_root = {})
      : config_(std::move(config)),
        text_provider_(std::move(text_provider)),
        image_provider_(std::move(image_provider)),
        cache_(std::move(cache)),
        image_root_(std::move(image_root)) {
    config_.validate();
  }

  static EmbeddingGateway over_http(ProviderConfig config, std::shared_ptr<EmbeddingCache> cache,
                                    std::filesystem::path image_root = {}) {
    const auto token = config.auth_token();
    auto text = std::make_shared<HttpEmbeddingProvider>(config.text_endpoint, token, config.timeout);
    auto image =
        std::make_shared<HttpEmbeddingProvider>(config.image_endpoint, token, config.timeout);
    return EmbeddingGateway(std::move(config), text, image, std::move(cache), std::move(image_root));
  }

  const ProviderConfig& config() const noexcept { return config_; }

  EmbeddingVector embed_text(std::string_view text) {
    if (is_blank(text)) throw PreconditionError("cannot embed empty text");
    const auto key = text_key(text);
    if (auto hit = cache_->get("text", key)) return *hit;
    auto raw = text_provider_->embed({std::string(text)});
    auto v = finish(raw.at(0), config_.text_dim, "text embedding");
    cache_->put("text", key, v);
    return v;
  }

  EmbeddingVector embed_image(const std::string& image_ref) {
    const auto bytes = load_image_bytes(image_ref, image_root_, config_.timeout);
    const auto key = image_key(bytes);
    if (auto hit = cache_->get("image", key)) return *hit;
    const auto png = resize_to_png(bytes, config_.image_resolution);
    auto raw = image_provider_->embed({httplib::detail::base64_encode(png)});
    auto v = finish(raw.at(0), config_.image_dim, "image embedding");
    cache_->put("image", key, v);
    return v;
  }

  RecordEmbeddings embed_record(const ScenarioRecord& r) {
    return {embed_image(r.image_ref), embed_text(retrieval_text(r))};
  }

  // Ensures every record has both vectors cached. Counts are per vector;
  // failed record ids are listed, never thrown.
  CacheStats warm_cache(std::span<const ScenarioRecord> records) {
    CacheStats stats;
    struct Pending {
      std::string key;
      std::string payload;
      std::vector<std::size_t> owners;  // record indices
    };
    std::vector<Pending> text_jobs, image_jobs;
    std::vector<bool> failed(records.size(), false);
    std::unordered_map<std::string, std::size_t> text_seen, image_seen;

    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      const auto& t = retrieval_text(r);
      if (is_blank(t)) {
        failed[i] = true;
        ++stats.failures;
      } else {
        auto key = text_key(t);
        if (auto it = text_seen.find(key); it != text_seen.end()) {
          text_jobs[it->second].owners.push_back(i);
          ++stats.hits;
        } else if (cache_->get("text", key)) {
          ++stats.hits;
        } else {
          text_seen.emplace(key, text_jobs.size());
          text_jobs.push_back({key, t, {i}});
        }
      }
      try {
        auto bytes = load_image_bytes(r.image_ref, image_root_, config_.timeout);
        auto key = image_key(bytes);
        if (auto it = image_seen.find(key); it != image_seen.end()) {
          image_jobs[it->second].owners.push_back(i);
          ++stats.hits;
        } else if (cache_->get("image", key)) {
          ++stats.hits;
        } else {
          image_seen.emplace(key, image_jobs.size());
          image_jobs.push_back({key, resize_to_png(bytes, config_.image_resolution), {i}});
          image_jobs.back().payload = httplib::detail::base64_encode(image_jobs.back().payload);
        }
      } catch (const Error&) {
        failed[i] = true;
        ++stats.failures;
      }
    }

    std::mutex mu;
    auto run = [&](std::vector<Pending>& jobs, EmbeddingProvider& provider, std::size_t dim,
                   const std::string& kind) {
      const std::size_t bs = config_.batch_size;
      const std::size_t batches = (jobs.size() + bs - 1) / bs;
      parallel_for_bounded(batches, config_.max_in_flight, [&](std::size_t b) {
        const std::size_t lo = b * bs;
        const std::size_t hi = std::min(jobs.size(), lo + bs);
        std::vector<std::string> inputs;
        for (std::size_t j = lo; j < hi; ++j) inputs.push_back(jobs[j].payload);
        std::vector<EmbeddingVector> vecs;
        bool ok = true;
        try {
          auto raw = provider.embed(inputs);
          if (raw.size() != inputs.size()) throw ProviderError("batch size mismatch");
          for (auto& row : raw) vecs.push_back(finish(row, dim, kind + " embedding"));
        } catch (const Error&) {
          ok = false;
        }
        std::lock_guard lock(mu);
        for (std::size_t j = lo; j < hi; ++j) {
          if (ok) {
            cache_->put(kind, jobs[j].key, vecs[j - lo]);
            ++stats.misses;
          } else {
            ++stats.failures;
            for (auto owner : jobs[j].owners) failed[owner] = true;
          }
        }
      });
    };
    run(text_jobs, *text_provider_, config_.text_dim, "text");
    run(image_jobs, *image_provider_, config_.image_dim, "image");

    for (std::size_t i = 0; i < records.size(); ++i)
      if (failed[i]) stats.failed_ids.push_back(records[i].id);
    return stats;
  }

 private:
  EmbeddingVector finish(const std::vector<double>& raw, std::size_t dim, const std::string& what) {
    if (raw.size() != dim) throw DimensionMismatch(dim, raw.size(), what);
    return normalize(raw);
  }

  std::string text_key(std::string_view text) const {
    return Sha256().field("text").field(text).hex();
  }
  std::string image_key(std::string_view bytes) const {
    return Sha256().field("image").field(bytes).field(std::to_string(config_.image_resolution)).hex();
  }

  ProviderConfig config_;
  std::shared_ptr<EmbeddingProvider> text_provider_;
  std::shared_ptr<EmbeddingProvider> image_provider_;
  std::shared_ptr<EmbeddingCache> cache_;
  std::filesystem::path image_root_;
};

}  // namespace ricl
