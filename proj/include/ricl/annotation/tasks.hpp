#pragma once

// Pairwise human-evaluation tasks. Each task shows one query (image, context,
// outcome) and two explanations labeled only "a" and "b". Which condition
// produced each option is kept in `hidden` and never leaves the server.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ricl/core/hash.hpp"
#include "ricl/core/jsonl.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/rng.hpp"
#include "ricl/icl/config.hpp"
#include "ricl/icl/runner.hpp"

namespace ricl {

// One side of a comparison: a source label and an explanation per query.
struct TaskSide {
  std::string label;
  std::vector<std::pair<std::string, std::string>> texts;  // (query id, text), in source order
};

inline TaskSide side_from_manifest(const RunManifest& m) {
  TaskSide s{manifest_stem(m.config), {}};
  for (const auto& e : m.entries)
    if (e.reply && !is_blank(*e.reply)) s.texts.emplace_back(e.query_id, *e.reply);
  return s;
}

// Corpus explanations of one source for the test records of a subset.
inline TaskSide side_from_corpus(const Corpus& corpus, Subset subset, ExplanationSource source) {
  TaskSide s{std::string(to_string(source)), {}};
  for (const auto* r : corpus.select(subset, Split::test))
    for (const auto* e : corpus.explanations_for(r->id))
      if (e->source == source) {
        s.texts.emplace_back(r->id, e->text);
        break;
      }
  return s;
}

struct HiddenAssignment {
  std::string source_a;
  std::string source_b;
};

struct AnnotationTask {
  std::string task_id;
  std::string query_record_id;
  std::string image_ref;
  std::string context;
  std::string outcome;
  std::string option_a;
  std::string option_b;
  HiddenAssignment hidden;

  friend bool operator==(const AnnotationTask& x, const AnnotationTask& y) {
    return x.task_id == y.task_id && x.query_record_id == y.query_record_id && x.option_a == y.option_a &&
           x.option_b == y.option_b && x.hidden.source_a == y.hidden.source_a && x.hidden.source_b == y.hidden.source_b;
  }
};

// Samples `sample_size` queries common to both sides (uniform, under seed, in
// draw order) and randomizes which side appears as option a per task.
inline std::vector<AnnotationTask> build_tasks(const TaskSide& first, const TaskSide& second, const Corpus& corpus,
                                               std::size_t sample_size, RngSeed seed) {
  if (first.label == second.label) throw PreconditionError("both sides carry the label '" + first.label + "'");
  std::map<std::string, std::string> second_text(second.texts.begin(), second.texts.end());
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> common;
  for (const auto& [qid, text] : first.texts)
    if (auto it = second_text.find(qid); it != second_text.end()) common.push_back({qid, {text, it->second}});
  if (common.empty()) throw PreconditionError("the two sides share no queries");
  if (sample_size > common.size())
    throw PreconditionError("sample size " + std::to_string(sample_size) + " exceeds the " +
                            std::to_string(common.size()) + " shared queries");
  Rng rng(derive(seed, "sample"));
  std::vector<AnnotationTask> out;
  for (auto i : rng.sample_indices(common.size(), sample_size)) {
    const auto& [qid, texts] = common[i];
    const auto& rec = corpus.at(qid);
    AnnotationTask t;
    t.task_id = "task-" + Sha256().field(first.label).field(second.label).field(qid).field(std::to_string(seed.value))
                              .hex()
                              .substr(0, 16);
    t.query_record_id = qid;
    t.image_ref = rec.image_ref;
    t.context = rec.caption;
    t.outcome = rec.outcome;
    const bool flip = Rng(derive(seed, "ab/" + qid)).coin();
    t.option_a = flip ? texts.second : texts.first;
    t.option_b = flip ? texts.first : texts.second;
    t.hidden = flip ? HiddenAssignment{second.label, first.label} : HiddenAssignment{first.label, second.label};
    out.push_back(std::move(t));
  }
  return out;
}

// Server-side record, hidden assignment included.
inline Json to_json(const AnnotationTask& t) {
  return Json{{"task_id", t.task_id},   {"query_id", t.query_record_id}, {"image_ref", t.image_ref},
              {"context", t.context},   {"outcome", t.outcome},          {"option_a", t.option_a},
              {"option_b", t.option_b}, {"source_a", t.hidden.source_a}, {"source_b", t.hidden.source_b}};
}

// What the annotator sees: no sources, no query id, no image path.
inline Json ui_payload(const AnnotationTask& t) {
  return Json{{"task_id", t.task_id},
              {"image_url", "/api/images/" + t.task_id},
              {"context", t.context},
              {"outcome", t.outcome},
              {"options", Json{{"a", t.option_a}, {"b", t.option_b}}}};
}

inline void save_tasks(const std::filesystem::path& path, const std::vector<AnnotationTask>& tasks) {
  std::string data = "# ricl-tasks v1\n";
  for (const auto& t : tasks) data += dump_line(to_json(t)) + "\n";
  write_file_atomic(path, data);
}

inline std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path) {
  std::vector<AnnotationTask> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    AnnotationTask t;
    t.task_id = require_string(j, "task_id", line);
    t.query_record_id = require_string(j, "query_id", line);
    t.image_ref = require_string(j, "image_ref", line);
    t.context = require_string(j, "context", line);
    t.outcome = require_string(j, "outcome", line);
    t.option_a = require_string(j, "option_a", line);
    t.option_b = require_string(j, "option_b", line);
    t.hidden.source_a = require_string(j, "source_a", line);
    t.hidden.source_b = require_string(j, "source_b", line);
    for (const auto& prev : out)
      if (prev.task_id == t.task_id) throw SchemaError("duplicate task id '" + t.task_id + "'", line);
    out.push_back(std::move(t));
  });
  return out;
}

}  // namespace ricl
