#pragma once

// Content-addressed embedding cache.
//
// Disk layout:  <root>/<kind>/<key[0:2]>/<key>.vec
// where key is a SHA-256 hex digest and each file is
//   u32 dim (LE) | dim x f32 (LE)
// Vectors are stored after normalization. Reads are concurrent, writes are
// serialized; a file is written to a temp name and renamed into place.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "ricl/core/endian.hpp"
#include "ricl/embedding/vector.hpp"

namespace ricl {

class EmbeddingCache {
 public:
  // Empty root: memory-only cache.
  explicit EmbeddingCache(std::filesystem::path root = {}) : root_(std::move(root)) {}

  std::optional<EmbeddingVector> get(const std::string& kind, const std::string& key) const {
    const auto full = kind + "/" + key;
    {
      std::shared_lock lock(mu_);
      if (auto it = mem_.find(full); it != mem_.end()) return it->second;
    }
    if (root_.empty()) return std::nullopt;
    auto v = read_file(path_for(kind, key));
    if (!v) return std::nullopt;
    std::unique_lock lock(mu_);
    mem_.emplace(full, *v);
    return v;
  }

  void put(const std::string& kind, const std::string& key, const EmbeddingVector& v) {
    std::unique_lock lock(mu_);
    mem_[kind + "/" + key] = v;
    if (!root_.empty()) write_file(path_for(kind, key), v);
  }

  std::size_t memory_size() const {
    std::shared_lock lock(mu_);
    return mem_.size();
  }

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path path_for(const std::string& kind, const std::string& key) const {
    return root_ / kind / key.substr(0, 2) / (key + ".vec");
  }

  static std::optional<EmbeddingVector> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    dim = to_le32(dim);
    if (!in || dim == 0 || dim > (1u << 20)) return std::nullopt;
    EmbeddingVector v;
    v.values.resize(dim);
    for (auto& x : v.values) {
      std::uint32_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), 4);
      x = std::bit_cast<float>(to_le32(bits));
    }
    if (!in) return std::nullopt;
    v.normalized = true;
    return v;
  }

  static void write_file(const std::filesystem::path& p, const EmbeddingVector& v) {
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write cache file " + tmp.string());
      const std::uint32_t dim = to_le32(static_cast<std::uint32_t>(v.values.size()));
      out.write(reinterpret_cast<const char*>(&dim), 4);
      for (float x : v.values) {
        const std::uint32_t bits = to_le32(std::bit_cast<std::uint32_t>(x));
        out.write(reinterpret_cast<const char*>(&bits), 4);
      }
    }
    std::filesystem::rename(tmp, p);
  }

  std::filesystem::path root_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> mem_;
};

}  // namespace ricl
