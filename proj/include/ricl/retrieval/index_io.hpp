#pragma once

// Index file format, version 1. All integers and floats little-endian.
//
//   offset  size  field
//   0       8     magic "RICLIDX\0"
//   8       4     u32 version (1)
//   12      4     u32 image_dim
//   16      4     u32 text_dim
//   20      4     u32 flags (0)
//   24      8     u64 count
//   32      4     u32 CRC-32 (zlib polynomial) of the payload
//   36      4     u32 reserved (0)
//   40      ...   payload:
//                   count x { u32 id_len, id_len bytes of UTF-8 id }
//                   count x image_dim x f32   image vectors, entry-major
//                   count x text_dim  x f32   text vectors, entry-major

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ricl/core/endian.hpp"
#include "ricl/core/fs.hpp"
#include "ricl/core/hash.hpp"
#include "ricl/retrieval/index.hpp"

namespace ricl {

class CorruptIndex : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<char, 8> kIndexMagic{'R', 'I', 'C', 'L', 'I', 'D', 'X', '\0'};
inline constexpr std::uint32_t kIndexVersion = 1;
inline constexpr std::size_t kIndexHeaderSize = 40;

class IndexCodec {
 public:
  static std::vector<unsigned char> encode(const MerIndex& idx) {
    std::vector<unsigned char> payload;
    for (const auto& id : idx.ids_) {
      put32(payload, static_cast<std::uint32_t>(id.size()));
      payload.insert(payload.end(), id.begin(), id.end());
    }
    for (float x : idx.image_) put32(payload, std::bit_cast<std::uint32_t>(x));
    for (float x : idx.text_) put32(payload, std::bit_cast<std::uint32_t>(x));

    std::vector<unsigned char> out;
    out.reserve(kIndexHeaderSize + payload.size());
    out.insert(out.end(), kIndexMagic.begin(), kIndexMagic.end());
    put32(out, kIndexVersion);
    put32(out, static_cast<std::uint32_t>(idx.image_dim_));
    put32(out, static_cast<std::uint32_t>(idx.text_dim_));
    put32(out, 0);
    put64(out, idx.ids_.size());
    put32(out, crc32_of(payload));
    put32(out, 0);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
  }

  static MerIndex decode(std::span<const unsigned char> bytes) {
    if (bytes.size() < kIndexHeaderSize) throw CorruptIndex("index file truncated (header)");
    if (!std::equal(kIndexMagic.begin(), kIndexMagic.end(), bytes.begin()))
      throw CorruptIndex("not an index file (bad magic)");
    std::size_t off = 8;
    const auto version = get32(bytes, off);
    if (version != kIndexVersion)
      throw CorruptIndex("unsupported index version " + std::to_string(version));
    const std::size_t image_dim = get32(bytes, off);
    const std::size_t text_dim = get32(bytes, off);
    (void)get32(bytes, off);  // flags
    const std::uint64_t count = get64(bytes, off);
    const std::uint32_t crc = get32(bytes, off);
    (void)get32(bytes, off);  // reserved
    const auto payload = bytes.subspan(kIndexHeaderSize);
    if (crc32_of(payload) != crc) throw CorruptIndex("index checksum mismatch");
    if (image_dim == 0 || text_dim == 0 || count == 0) throw CorruptIndex("index header has zero field");

    MerIndex idx;
    idx.image_dim_ = image_dim;
    idx.text_dim_ = text_dim;
    off = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto len = get32(payload, off);
      need(payload, off, len);
      idx.ids_.emplace_back(reinterpret_cast<const char*>(payload.data() + off), len);
      off += len;
    }
    const std::size_t floats = count * (image_dim + text_dim);
    need(payload, off, floats * 4);
    if (payload.size() - off != floats * 4) throw CorruptIndex("index payload has trailing bytes");
    idx.image_.resize(count * image_dim);
    idx.text_.resize(count * text_dim);
    for (auto& x : idx.image_) x = std::bit_cast<float>(get32(payload, off));
    for (auto& x : idx.text_) x = std::bit_cast<float>(get32(payload, off));
    try {
      idx.finalize();
    } catch (const PreconditionError& e) {
      throw CorruptIndex(e.what());
    }
    return idx;
  }

 private:
  static void put32(std::vector<unsigned char>& out, std::uint32_t v) {
    v = to_le32(v);
    unsigned char b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
  }
  static void put64(std::vector<unsigned char>& out, std::uint64_t v) {
    v = to_le64(v);
    unsigned char b[8];
    std::memcpy(b, &v, 8);
    out.insert(out.end(), b, b + 8);
  }
  static void need(std::span<const unsigned char> in, std::size_t off, std::size_t n) {
    if (off > in.size() || in.size() - off < n) throw CorruptIndex("index file truncated");
  }
  static std::uint32_t get32(std::span<const unsigned char> in, std::size_t& off) {
    need(in, off, 4);
    std::uint32_t v;
    std::memcpy(&v, in.data() + off, 4);
    off += 4;
    return to_le32(v);
  }
  static std::uint64_t get64(std::span<const unsigned char> in, std::size_t& off) {
    need(in, off, 8);
    std::uint64_t v;
    std::memcpy(&v, in.data() + off, 8);
    off += 8;
    return to_le64(v);
  }
};

inline void save_index(const MerIndex& idx, const std::filesystem::path& path) {
  const auto bytes = IndexCodec::encode(idx);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline MerIndex load_index(const std::filesystem::path& path) {
  const auto data = read_file(path);
  return IndexCodec::decode(
      std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(data.data()), data.size()));
}

}  // namespace ricl
