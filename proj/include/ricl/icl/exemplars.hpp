#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ricl/core/record.hpp"
#include "ricl/core/rng.hpp"
#include "ricl/embedding/gateway.hpp"
#include "ricl/icl/config.hpp"
#include "ricl/retrieval/index.hpp"

namespace ricl {

// Query-side embeddings for retrieved mode (image + outcome text).
using QueryEmbedder = std::function<RecordEmbeddings(const ScenarioRecord&)>;

// Explanation shown with an exemplar: llm, then human_llm, then human.
// Model-run outputs are never used as exemplars.
inline const Explanation* exemplar_explanation(const Corpus& corpus, std::string_view id) {
  const Explanation* best = nullptr;
  auto rank = [](ExplanationSource s) {
    switch (s) {
      case ExplanationSource::llm: return 0;
      case ExplanationSource::human_llm: return 1;
      case ExplanationSource::human: return 2;
      default: return 9;
    }
  };
  for (const auto* e : corpus.explanations_for(id))
    if (rank(e->source) < 9 && (!best || rank(e->source) < rank(best->source))) best = e;
  return best;
}

// Records usable as exemplars: db split, requested subset, with an explanation.
inline std::vector<const ScenarioRecord*> exemplar_pool(const Corpus& corpus, Subset subset) {
  std::vector<const ScenarioRecord*> out;
  for (const auto* r : corpus.select(subset, Split::db))
    if (exemplar_explanation(corpus, r->id)) out.push_back(r);
  return out;
}

inline std::vector<std::string> select_exemplars(const ScenarioRecord& query, const ExperimentConfig& config,
                                                 const Corpus& corpus, const MerIndex* index = nullptr,
                                                 const QueryEmbedder& embed = {}) {
  config.validate();
  if (config.shots == 0) return {};
  const auto shots = static_cast<std::size_t>(config.shots);
  auto pool = exemplar_pool(corpus, config.subset);
  std::erase_if(pool, [&](const ScenarioRecord* r) { return r->id == query.id; });

  std::vector<std::string> out;
  if (config.mode == ExemplarMode::random) {
    if (shots > pool.size())
      throw PreconditionError("shots (" + std::to_string(shots) + ") exceeds the exemplar pool (" +
                              std::to_string(pool.size()) + ")");
    Rng rng(derive(config.seed, "exemplars/" + query.id));
    for (auto i : rng.sample_indices(pool.size(), shots)) out.push_back(pool[i]->id);
    return out;
  }

  if (!index || index->size() == 0) throw PreconditionError("retrieved mode needs a built index");
  if (!embed) throw PreconditionError("retrieved mode needs a query embedder");
  const auto qe = embed(query);
  RetrievalQuery q{qe.image, qe.text, std::min(config.k_pool, index->size()), config.alpha};
  std::set<std::string_view> eligible;
  for (const auto* r : pool) eligible.insert(r->id);
  for (const auto& hit : index->retrieve(q)) {
    if (out.size() == shots) break;
    if (eligible.contains(hit.scenario_id)) out.push_back(hit.scenario_id);
  }
  if (out.size() < shots)
    throw PreconditionError("only " + std::to_string(out.size()) + " eligible exemplars in the top " +
                            std::to_string(q.k) + " hits; raise k_pool");
  return out;
}

}  // namespace ricl
