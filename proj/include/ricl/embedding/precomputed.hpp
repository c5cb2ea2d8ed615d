#pragma once

// Embeddings supplied as a file instead of a live provider. One line per
// record:  {"id": "...", "image": [..], "text": [..]}.  Vectors are
// normalized on load.

#include <filesystem>
#include <map>
#include <string>

#include "ricl/core/jsonl.hpp"
#include "ricl/embedding/gateway.hpp"

namespace ricl {

class PrecomputedEmbeddings {
 public:
  static PrecomputedEmbeddings load(const std::filesystem::path& path) {
    PrecomputedEmbeddings out;
    for_each_jsonl(path, [&](const Json& j, std::size_t line) {
      const auto id = require_string(j, "id", line);
      auto vec = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) throw SchemaError(std::string("missing array '") + key + "'", line);
        const auto raw = j[key].get<std::vector<double>>();
        if (raw.empty()) throw SchemaError(std::string("empty vector '") + key + "'", line);
        return normalize(raw);
      };
      RecordEmbeddings e{vec("image"), vec("text")};
      if (!out.by_id_.empty()) {
        const auto& first = out.by_id_.begin()->second;
        if (e.image.dim() != first.image.dim()) throw DimensionMismatch(first.image.dim(), e.image.dim(), "image");
        if (e.text.dim() != first.text.dim()) throw DimensionMismatch(first.text.dim(), e.text.dim(), "text");
      }
      if (!out.by_id_.emplace(id, std::move(e)).second) throw SchemaError("duplicate id '" + id + "'", line);
    });
    return out;
  }

  std::size_t size() const noexcept { return by_id_.size(); }

  const RecordEmbeddings& at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw PreconditionError("no precomputed embedding for '" + id + "'");
    return it->second;
  }

  static Json line(const std::string& id, const RecordEmbeddings& e) {
    return Json{{"id", id}, {"image", e.image.values}, {"text", e.text.values}};
  }

 private:
  std::map<std::string, RecordEmbeddings> by_id_;
};

}  // namespace ricl
