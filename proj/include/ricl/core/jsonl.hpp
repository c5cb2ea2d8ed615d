#pragma once

// Line-delimited JSON helpers shared by the corpus, manifest, judgment and
// pairing logs. Lines starting with '#' are comments; blank lines are skipped.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>

#include <fcntl.h>
#include <unistd.h>

#include "json.hpp"
#include "ricl/core/error.hpp"
#include "ricl/core/fs.hpp"

namespace ricl {

using Json = nlohmann::ordered_json;

inline std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::strict);
}

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw SchemaError("expected a JSON object", line_no);
    fn(j, line_no);
  }
}

// Required string field; schema error names the field.
inline std::string require_string(const Json& j, std::string_view key, std::size_t line,
                                  bool allow_empty = false) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError("missing field '" + std::string(key) + "'", line);
  if (!it->is_string()) throw SchemaError("field '" + std::string(key) + "' must be a string", line);
  auto s = it->get<std::string>();
  if (!allow_empty && s.empty()) throw SchemaError("field '" + std::string(key) + "' is empty", line);
  return s;
}

// Append-only log. Each line goes out in one write(2) and is fsync'd when
// `durable` is set, so an acknowledged line survives a crash.
class JsonlAppender {
 public:
  JsonlAppender(const std::filesystem::path& path, bool durable = false) : durable_(durable) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path.string() + " for append");
  }
  JsonlAppender(const JsonlAppender&) = delete;
  JsonlAppender& operator=(const JsonlAppender&) = delete;
  ~JsonlAppender() {
    if (fd_ >= 0) ::close(fd_);
  }

  void append_raw(std::string line) {
    line.push_back('\n');
    std::lock_guard lock(mu_);
    std::size_t off = 0;
    while (off < line.size()) {
      const auto n = ::write(fd_, line.data() + off, line.size() - off);
      if (n < 0) throw IoError("write failed");
      off += static_cast<std::size_t>(n);
    }
    if (durable_) ::fsync(fd_);
  }

  void append(const Json& j) { append_raw(dump_line(j)); }

 private:
  int fd_ = -1;
  bool durable_;
  std::mutex mu_;
};

// Drop a trailing partial line left by a crash mid-write.
inline void truncate_partial_tail(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec || size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.back() == '\n') return;
  const auto last_nl = data.find_last_of('\n');
  std::filesystem::resize_file(path, last_nl == std::string::npos ? 0 : last_nl + 1);
}

}  // namespace ricl
