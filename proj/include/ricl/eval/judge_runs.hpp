#pragma once

// Judges a run manifest against the corpus reference explanations.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ricl/core/parallel.hpp"
#include "ricl/eval/judge.hpp"
#include "ricl/icl/prompt.hpp"
#include "ricl/icl/runner.hpp"

namespace ricl {

inline constexpr std::string_view kReferenceSource = "human_llm";

inline const Explanation* reference_explanation(const Corpus& corpus, std::string_view id) {
  for (const auto* e : corpus.explanations_for(id))
    if (e->source == ExplanationSource::human_llm) return e;
  return nullptr;
}

inline std::string judge_instruction(const IclTemplate& tmpl, const ScenarioRecord& r) {
  return render_placeholders(tmpl.judge_instruction, {{"context", r.caption}, {"outcome", r.outcome}});
}

struct JudgeRunOptions {
  RngSeed seed{0};
  std::size_t max_in_flight = 4;
  int retries = 3;
  std::string judge_model;
};

// One judgment per manifest entry that has a reply and whose query has a
// reference explanation. Output a is the model reply, output b the
// reference. Judgments are returned in manifest order and, when `log` is
// given, appended to it in that order.
inline std::vector<PairwiseJudgment> judge_manifest(const RunManifest& manifest, const Corpus& corpus,
                                                    const IclTemplate& tmpl, ChatClient& judge,
                                                    const JudgeRunOptions& opt = {},
                                                    const std::optional<std::filesystem::path>& log = std::nullopt) {
  ExperimentConfig c = manifest.config;
  const auto label = manifest_stem(c);
  std::vector<JudgeInputs> inputs;
  for (const auto& e : manifest.entries) {
    if (!e.reply || is_blank(*e.reply)) continue;
    const auto& q = corpus.at(e.query_id);
    const auto* ref = reference_explanation(corpus, q.id);
    if (!ref) continue;
    inputs.push_back({label + "/" + q.id, q.id, judge_instruction(tmpl, q), *e.reply, ref->text, label,
                      std::string(kReferenceSource)});
  }
  std::vector<PairwiseJudgment> out(inputs.size());
  parallel_for_bounded(inputs.size(), opt.max_in_flight, [&](std::size_t i) {
    out[i] = judge_pairwise(inputs[i], judge, derive(opt.seed, inputs[i].task_id).value, opt.retries,
                            opt.judge_model);
  });
  if (log) {
    JsonlAppender app(*log, true);
    for (const auto& j : out) app.append(to_json(j));
  }
  return out;
}

}  // namespace ricl
