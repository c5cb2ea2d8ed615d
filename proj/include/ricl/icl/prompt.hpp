#pragma once

// Prompt layout, exemplar-major:
//
//   [text]  instruction
//   per exemplar:  [image] exemplar image   [text] exemplar block
//   [image] query image   [text] query block
//
// so a k-shot prompt has 2k + 3 segments, all in one user message. The
// exemplar block fills {context} {outcome} {explanation}; the query block
// fills {context} {outcome}. Context is the record caption.

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ricl/core/fs.hpp"
#include "ricl/core/hash.hpp"
#include "ricl/core/prompts.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/template.hpp"
#include "ricl/embedding/image_prep.hpp"
#include "ricl/icl/exemplars.hpp"
#include "ricl/llm/chat_client.hpp"

namespace ricl {

struct IclTemplate {
  std::string instruction;
  std::string exemplar;
  std::string query;
  std::string judge_instruction;

  static IclTemplate from_json(const Json& j) {
    IclTemplate t;
    for (auto [key, dst] : {std::pair{"instruction", &t.instruction}, std::pair{"exemplar", &t.exemplar},
                            std::pair{"query", &t.query}, std::pair{"judge_instruction", &t.judge_instruction}}) {
      if (!j.contains(key) || !j[key].is_string())
        throw PreconditionError(std::string("template lacks string field '") + key + "'");
      *dst = j[key].get<std::string>();
    }
    return t;
  }
  static IclTemplate builtin() { return from_json(Json::parse(prompts::kIclTemplateJson)); }
  static IclTemplate load(const std::filesystem::path& p) {
    try {
      return from_json(Json::parse(read_file(p)));
    } catch (const nlohmann::json::exception& e) {
      throw PreconditionError("template " + p.string() + ": " + e.what());
    }
  }

  std::string digest() const {
    return Sha256().field(instruction).field(exemplar).field(query).field(judge_instruction).hex();
  }
};

struct ExemplarView {
  std::string scenario_id;
  std::string image_ref;
  std::string caption;
  std::string outcome;
  std::string explanation;
};

struct PromptBundle {
  std::string query_record_id;
  std::vector<ExemplarView> exemplars;
  std::string instruction;
  std::vector<ContentPart> segments;

  // Hash of the segment sequence; image segments contribute their reference,
  // not their bytes, so it can be recomputed without the image files.
  std::string hash() const {
    Sha256 h;
    for (const auto& s : segments) {
      if (s.kind == ContentPart::Kind::text) {
        h.field("text").field(s.text);
      } else {
        h.field("image").field(s.image_ref);
      }
    }
    return h.hex();
  }
};

// Image payload for a reference: base64 bytes, or nullopt to send the
// reference alone. Throws PreconditionError for a missing file.
using ImageResolver = std::function<std::optional<std::string>(const std::string& image_ref)>;

// Local files are resized and inlined as base64 PNG; URLs go by reference.
class FileImageResolver {
 public:
  FileImageResolver(std::filesystem::path root, int resolution) : root_(std::move(root)), resolution_(resolution) {}

  std::optional<std::string> operator()(const std::string& ref) {
    if (is_url(ref)) return std::nullopt;
    {
      std::lock_guard lock(*mu_);
      if (auto it = cache_->find(ref); it != cache_->end()) return it->second;
    }
    auto b64 = httplib::detail::base64_encode(resize_to_png(load_image_bytes(ref, root_), resolution_));
    std::lock_guard lock(*mu_);
    return cache_->emplace(ref, std::move(b64)).first->second;
  }

 private:
  std::filesystem::path root_;
  int resolution_;
  std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::string, std::string>> cache_ = std::make_shared<std::map<std::string, std::string>>();
};

inline std::size_t expected_segment_count(std::size_t shots) { return 2 * shots + 3; }

inline PromptBundle assemble_prompt(const ScenarioRecord& query, const std::vector<ExemplarView>& exemplars,
                                    const IclTemplate& tmpl, const ImageResolver& images = {}) {
  PromptBundle b;
  b.query_record_id = query.id;
  b.exemplars = exemplars;
  b.instruction = render_placeholders(tmpl.instruction, {});
  b.segments.push_back(ContentPart::of_text(b.instruction));
  auto image = [&](const std::string& ref) {
    auto part = ContentPart::of_image(ref);
    if (images) part.image_base64 = images(ref);
    return part;
  };
  for (const auto& ex : exemplars) {
    if (ex.scenario_id == query.id) throw PreconditionError("exemplar " + ex.scenario_id + " is the query itself");
    b.segments.push_back(image(ex.image_ref));
    b.segments.push_back(ContentPart::of_text(render_placeholders(
        tmpl.exemplar, {{"context", ex.caption}, {"outcome", ex.outcome}, {"explanation", ex.explanation}})));
  }
  b.segments.push_back(image(query.image_ref));
  b.segments.push_back(
      ContentPart::of_text(render_placeholders(tmpl.query, {{"context", query.caption}, {"outcome", query.outcome}})));
  return b;
}

inline std::vector<ExemplarView> exemplar_views(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::vector<ExemplarView> out;
  for (const auto& id : ids) {
    const auto& r = corpus.at(id);
    const auto* e = exemplar_explanation(corpus, id);
    if (!e) throw PreconditionError("exemplar " + id + " has no usable explanation");
    out.push_back({r.id, r.image_ref, r.caption, r.outcome, e->text});
  }
  return out;
}

inline ChatRequest to_chat_request(const PromptBundle& b, const std::string& model) {
  ChatRequest r;
  r.model = model;
  r.messages.push_back({"user", b.segments});
  return r;
}

}  // namespace ricl
