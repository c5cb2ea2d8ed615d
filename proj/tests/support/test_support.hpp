#pragma once

// Shared fixtures: temp directories, scripted providers and random data.

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "ricl/core/rng.hpp"
#include "ricl/embedding/provider.hpp"
#include "ricl/embedding/vector.hpp"
#include "ricl/llm/chat_client.hpp"

namespace ricl::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ricl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Provider whose output is a pure function of the input bytes, counting calls.
class ScriptedProvider : public EmbeddingProvider {
 public:
  using Fn = std::function<std::vector<double>(const std::string&)>;

  explicit ScriptedProvider(std::size_t dim) : fn_([dim](const std::string& in) {
    return hashed_vector(in, dim);
  }) {}
  explicit ScriptedProvider(Fn fn) : fn_(std::move(fn)) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
    ++calls;
    items += inputs.size();
    if (fail) throw ProviderError("scripted provider failure");
    std::vector<std::vector<double>> out;
    for (const auto& in : inputs) out.push_back(fn_(in));
    return out;
  }

  static std::vector<double> hashed_vector(const std::string& in, std::size_t dim) {
    Rng rng(RngSeed{fnv1a64(in)});
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.unit() * 2.0 - 1.0;
    return v;
  }

  std::atomic<int> calls{0};
  std::atomic<int> items{0};
  std::atomic<bool> fail{false};

 private:
  Fn fn_;
};

inline std::vector<float> random_unit(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = nd(gen);
  return normalize(v).values;
}

inline EmbeddingVector random_embedding(std::mt19937_64& gen, std::size_t dim) {
  return EmbeddingVector{random_unit(gen, dim), true};
}

inline std::string base64_decode(const std::string& in) {
  std::string out(in.size() / 4 * 3 + 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  out.resize(static_cast<std::size_t>(n));
  std::size_t pad = 0;
  for (auto it = in.rbegin(); it != in.rend() && *it == '='; ++it) ++pad;
  out.resize(out.size() - pad);
  return out;
}

// Small solid-colour PNG.
inline void write_png(const std::filesystem::path& p, int w, int h, int shade) {
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(shade, 255 - shade, (shade * 7) % 256));
  cv::imwrite(p.string(), img);
}

// Chat client answering through a callback and keeping every request.
class ScriptedChat : public ChatClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedChat(Fn fn) : fn_(std::move(fn)) {}

  std::string chat(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    return fn_(request);
  }

  std::vector<ChatRequest> requests;

 private:
  Fn fn_;
  std::mutex mu_;
};

}  // namespace ricl::testing
