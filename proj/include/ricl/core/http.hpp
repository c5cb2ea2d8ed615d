#pragma once

// Single inclusion point for cpp-httplib so every translation unit sees the
// same configuration.
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <chrono>
#include <string>
#include <utility>

#include "ricl/core/error.hpp"

namespace ricl {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

inline Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline bool is_url(std::string_view ref) {
  return ref.starts_with("http://") || ref.starts_with("https://");
}

// POST a JSON body, returning the response body. Non-2xx and transport
// failures become ProviderError.
inline std::string post_json(const std::string& url, const std::string& body,
                             const std::string& bearer, std::chrono::milliseconds timeout) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = client.Post(parts.path, headers, body, "application/json");
  if (!res) throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw ProviderError("request to " + url + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

inline std::string http_get(const std::string& url, const httplib::Params& params,
                            const std::string& bearer, std::chrono::milliseconds timeout) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = client.Get(parts.path, params, headers);
  if (!res) throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw ProviderError("request to " + url + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace ricl
