#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ricl/core/http.hpp"
#include "ricl/core/jsonl.hpp"

namespace ricl {

struct ImageCandidate {
  std::string url;
  int provider_rank = 0;

  friend bool operator==(const ImageCandidate&, const ImageCandidate&) = default;
};

inline constexpr std::size_t kMaxImageCandidates = 5;

enum class PairingStatus { pending, awaiting_review, selected };

inline std::string_view to_string(PairingStatus s) {
  switch (s) {
    case PairingStatus::pending: return "pending";
    case PairingStatus::awaiting_review: return "awaiting_review";
    case PairingStatus::selected: return "selected";
  }
  return "?";
}

// Candidate images for one scenario. `selected_index` points into
// `candidates`; `selected_url` records a manually found image instead.
struct ImagePairing {
  std::string scenario_id;
  std::string query;
  std::vector<ImageCandidate> candidates;
  std::optional<std::size_t> selected_index;
  std::optional<std::string> selected_url;
  std::string reviewer;
  PairingStatus status = PairingStatus::pending;
  std::string note;

  std::optional<std::string> selected_image() const {
    if (selected_index) return candidates.at(*selected_index).url;
    return selected_url;
  }
};

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  // Ranked image URLs for `query`, best first. Throws ProviderError.
  virtual std::vector<ImageCandidate> search(const std::string& query, std::size_t count) = 0;
};

// GET <endpoint>?q=<query>&count=<n>  ->  {"results": [{"url": "...", "rank": 1}, ...]}
// A bare array of URL strings is also accepted, ranked by position.
class HttpSearchClient : public SearchClient {
 public:
  HttpSearchClient(std::string endpoint, std::string bearer, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), bearer_(std::move(bearer)), timeout_(timeout) {}

  std::vector<ImageCandidate> search(const std::string& query, std::size_t count) override {
    const auto body =
        http_get(endpoint_, {{"q", query}, {"count", std::to_string(count)}}, bearer_, timeout_);
    Json j;
    try {
      j = Json::parse(body);
    } catch (const std::exception& e) {
      throw ProviderError(std::string("search reply is not JSON: ") + e.what());
    }
    std::vector<ImageCandidate> out;
    const Json* arr = j.is_array() ? &j : (j.contains("results") ? &j["results"] : nullptr);
    if (!arr || !arr->is_array()) throw ProviderError("search reply lacks a results array");
    int pos = 1;
    for (const auto& r : *arr) {
      if (r.is_string()) {
        out.push_back({r.get<std::string>(), pos});
      } else if (r.is_object() && r.contains("url") && r["url"].is_string()) {
        out.push_back({r["url"].get<std::string>(), r.value("rank", pos)});
      } else {
        throw ProviderError("malformed search result");
      }
      ++pos;
    }
    return out;
  }

 private:
  std::string endpoint_;
  std::string bearer_;
  std::chrono::milliseconds timeout_;
};

inline Json to_json(const ImagePairing& p) {
  Json j;
  j["scenario_id"] = p.scenario_id;
  j["query"] = p.query;
  j["candidates"] = Json::array();
  for (const auto& c : p.candidates) j["candidates"].push_back({{"url", c.url}, {"rank", c.provider_rank}});
  j["selected_index"] = p.selected_index ? Json(*p.selected_index) : Json(nullptr);
  j["selected_url"] = p.selected_url ? Json(*p.selected_url) : Json(nullptr);
  j["reviewer"] = p.reviewer;
  j["status"] = to_string(p.status);
  j["note"] = p.note;
  return j;
}

inline ImagePairing pairing_from_json(const Json& j, std::size_t line) {
  ImagePairing p;
  p.scenario_id = require_string(j, "scenario_id", line);
  p.query = j.value("query", "");
  for (const auto& c : j.at("candidates")) p.candidates.push_back({c.at("url"), c.value("rank", 0)});
  if (!j["selected_index"].is_null()) p.selected_index = j["selected_index"].get<std::size_t>();
  if (!j["selected_url"].is_null()) p.selected_url = j["selected_url"].get<std::string>();
  p.reviewer = j.value("reviewer", "");
  const auto status = j.value("status", "pending");
  p.status = status == "selected" ? PairingStatus::selected
             : status == "awaiting_review" ? PairingStatus::awaiting_review
                                           : PairingStatus::pending;
  p.note = j.value("note", "");
  if (p.candidates.size() > kMaxImageCandidates) throw SchemaError("more than 5 candidates", line);
  if (p.selected_index && *p.selected_index >= p.candidates.size())
    throw SchemaError("selected_index out of range", line);
  return p;
}

// Append-only audit log of pairings; the latest line per scenario wins.
class PairingStore {
 public:
  explicit PairingStore(std::filesystem::path path) : path_(std::move(path)), log_(path_, true) {}

  void record(const ImagePairing& p) { log_.append(to_json(p)); }

  std::map<std::string, ImagePairing> latest() const {
    std::map<std::string, ImagePairing> out;
    for_each_jsonl(path_, [&](const Json& j, std::size_t line) {
      auto p = pairing_from_json(j, line);
      out[p.scenario_id] = std::move(p);
    });
    return out;
  }

 private:
  std::filesystem::path path_;
  JsonlAppender log_;
};

// Searches for candidate images. Selection is left to a human reviewer; a
// provider failure yields a pending pairing with the error in `note`.
inline ImagePairing pair_images(const std::string& scenario_id, const std::string& query,
                                SearchClient& client, PairingStore* store = nullptr) {
  ImagePairing p;
  p.scenario_id = scenario_id;
  p.query = query;
  try {
    auto results = client.search(query, kMaxImageCandidates);
    if (results.size() > kMaxImageCandidates) results.resize(kMaxImageCandidates);
    p.candidates = std::move(results);
    p.status = PairingStatus::awaiting_review;
  } catch (const Error& e) {
    p.status = PairingStatus::pending;
    p.note = std::string("search failed: ") + e.what();
  }
  if (store) store->record(p);
  return p;
}

inline ImagePairing select_candidate(ImagePairing p, std::size_t index, std::string reviewer) {
  if (index >= p.candidates.size()) throw PreconditionError("candidate index out of range");
  p.selected_index = index;
  p.selected_url.reset();
  p.reviewer = std::move(reviewer);
  p.status = PairingStatus::selected;
  return p;
}

inline ImagePairing select_external(ImagePairing p, std::string url, std::string reviewer) {
  p.selected_index.reset();
  p.selected_url = std::move(url);
  p.reviewer = std::move(reviewer);
  p.status = PairingStatus::selected;
  return p;
}

}  // namespace ricl
