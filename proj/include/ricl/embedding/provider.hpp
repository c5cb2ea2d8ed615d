#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/http.hpp"
#include "ricl/core/jsonl.hpp"

namespace ricl {

// Raw (unnormalized) embedding backend. Inputs are texts for a text provider
// and base64 PNG payloads for an image provider.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) = 0;
};

struct ProviderConfig {
  std::string text_endpoint;
  std::string image_endpoint;
  std::size_t text_dim = 0;
  std::size_t image_dim = 0;
  // Name of the environment variable holding the bearer token.
  std::string auth_env = "RICL_EMBED_TOKEN";
  std::chrono::milliseconds timeout{30000};
  int image_resolution = 512;
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;

  void validate() const {
    if (text_dim == 0 || image_dim == 0) throw PreconditionError("embedding dims must be > 0");
    if (timeout.count() <= 0) throw PreconditionError("embedding timeout must be > 0");
    if (image_resolution <= 0) throw PreconditionError("image resolution must be > 0");
    if (batch_size == 0) throw PreconditionError("batch size must be > 0");
  }

  std::string auth_token() const {
    if (auth_env.empty()) return {};
    const char* v = std::getenv(auth_env.c_str());
    return v ? std::string(v) : std::string();
  }

  // RICL_TEXT_EMBED_URL, RICL_IMAGE_EMBED_URL, RICL_TEXT_DIM, RICL_IMAGE_DIM,
  // RICL_EMBED_TIMEOUT_MS, RICL_IMAGE_RESOLUTION.
  static ProviderConfig from_env() {
    ProviderConfig c;
    auto get = [](const char* k) -> std::string {
      const char* v = std::getenv(k);
      return v ? v : "";
    };
    c.text_endpoint = get("RICL_TEXT_EMBED_URL");
    c.image_endpoint = get("RICL_IMAGE_EMBED_URL");
    if (auto v = get("RICL_TEXT_DIM"); !v.empty()) c.text_dim = std::stoul(v);
    if (auto v = get("RICL_IMAGE_DIM"); !v.empty()) c.image_dim = std::stoul(v);
    if (auto v = get("RICL_EMBED_TIMEOUT_MS"); !v.empty())
      c.timeout = std::chrono::milliseconds(std::stol(v));
    if (auto v = get("RICL_IMAGE_RESOLUTION"); !v.empty()) c.image_resolution = std::stoi(v);
    return c;
  }
};

// JSON-over-HTTP provider:  POST {"inputs":[...]}  ->  {"vectors":[[...], ...]}
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string bearer, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), bearer_(std::move(bearer)), timeout_(timeout) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
    Json req;
    req["inputs"] = inputs;
    const auto body = post_json(endpoint_, dump_line(req), bearer_, timeout_);
    return parse_response(body, inputs.size());
  }

  static std::vector<std::vector<double>> parse_response(const std::string& body,
                                                         std::size_t expected) {
    Json res;
    try {
      res = Json::parse(body);
    } catch (const std::exception& e) {
      throw ProviderError(std::string("embedding response is not JSON: ") + e.what());
    }
    if (!res.is_object() || !res.contains("vectors") || !res["vectors"].is_array())
      throw ProviderError("embedding response lacks a 'vectors' array");
    const auto& arr = res["vectors"];
    if (arr.size() != expected)
      throw ProviderError("embedding response has " + std::to_string(arr.size()) +
                          " vectors for " + std::to_string(expected) + " inputs");
    std::vector<std::vector<double>> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_array()) throw ProviderError("embedding vector is not an array");
      std::vector<double> row;
      row.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw ProviderError("embedding component is not a number");
        row.push_back(x.get<double>());
      }
      out.push_back(std::move(row));
    }
    return out;
  }

 private:
  std::string endpoint_;
  std::string bearer_;
  std::chrono::milliseconds timeout_;
};

}  // namespace ricl
