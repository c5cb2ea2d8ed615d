#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/http.hpp"
#include "ricl/core/jsonl.hpp"

namespace ricl {

// Raw bytes for an image reference: a URL is fetched, anything else is a path
// resolved against `root` when relative.
inline std::string load_image_bytes(const std::string& image_ref, const std::filesystem::path& root,
                                    std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  if (is_url(image_ref)) {
    try {
      return http_get(image_ref, {}, {}, timeout);
    } catch (const ProviderError& e) {
      throw PreconditionError("image reference not resolvable: " + std::string(e.what()));
    }
  }
  std::filesystem::path p(image_ref);
  if (p.is_relative() && !root.empty()) p = root / p;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec))
    throw PreconditionError("image reference not resolvable: " + p.string());
  return read_file(p);
}

// Decodes, resizes to resolution x resolution (area interpolation when
// shrinking, linear otherwise) and re-encodes as PNG.
inline std::string resize_to_png(const std::string& bytes, int resolution) {
  std::vector<unsigned char> buf(bytes.begin(), bytes.end());
  cv::Mat img = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (img.empty()) throw PreconditionError("image bytes could not be decoded");
  cv::Mat resized;
  const bool shrinking = img.cols > resolution || img.rows > resolution;
  cv::resize(img, resized, cv::Size(resolution, resolution), 0, 0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  std::vector<unsigned char> out;
  if (!cv::imencode(".png", resized, out)) throw Error("PNG encoding failed");
  return std::string(out.begin(), out.end());
}

}  // namespace ricl
