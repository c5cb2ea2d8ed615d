#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/tokenizer.hpp"

namespace ricl {

enum class Subset { vis, lang };
enum class Split { db, test };
enum class ExplanationSource { human, llm, human_llm, model_run };

inline std::string_view to_string(Subset s) { return s == Subset::vis ? "vis" : "lang"; }
inline std::string_view to_string(Split s) { return s == Split::db ? "db" : "test"; }
inline std::string_view to_string(ExplanationSource s) {
  switch (s) {
    case ExplanationSource::human: return "human";
    case ExplanationSource::llm: return "llm";
    case ExplanationSource::human_llm: return "human_llm";
    case ExplanationSource::model_run: return "model_run";
  }
  return "?";
}

inline std::optional<Subset> parse_subset(std::string_view s) {
  if (s == "vis") return Subset::vis;
  if (s == "lang") return Subset::lang;
  return std::nullopt;
}
inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "db") return Split::db;
  if (s == "test") return Split::test;
  return std::nullopt;
}
inline std::optional<ExplanationSource> parse_source(std::string_view s) {
  if (s == "human") return ExplanationSource::human;
  if (s == "llm") return ExplanationSource::llm;
  if (s == "human_llm") return ExplanationSource::human_llm;
  if (s == "model_run") return ExplanationSource::model_run;
  return std::nullopt;
}

// One context/outcome pair. `caption` is the image's textual context and
// `outcome` the situation a model has to explain.
struct ScenarioRecord {
  std::string id;
  Subset subset = Subset::vis;
  std::string caption;
  std::string rationale;
  std::string outcome;
  std::string image_ref;
  Split split = Split::db;
  std::vector<std::string> categories;

  friend bool operator==(const ScenarioRecord&, const ScenarioRecord&) = default;
};

struct Explanation {
  std::string scenario_id;
  ExplanationSource source = ExplanationSource::human;
  std::string text;
  std::optional<std::string> run_id;
  std::size_t token_count = 0;

  friend bool operator==(const Explanation&, const Explanation&) = default;
};

inline Explanation make_explanation(std::string scenario_id, ExplanationSource source,
                                    std::string text,
                                    std::optional<std::string> run_id = std::nullopt) {
  Explanation e{std::move(scenario_id), source, std::move(text), std::move(run_id), 0};
  e.token_count = count_tokens(e.text);
  return e;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_ascii_space(c); });
}

inline void validate(const ScenarioRecord& r) {
  if (r.id.empty()) throw SchemaError("record id is empty");
  if (is_blank(r.caption)) throw SchemaError("record " + r.id + ": caption is empty");
  if (is_blank(r.outcome)) throw SchemaError("record " + r.id + ": outcome is empty");
  if (r.image_ref.empty()) throw SchemaError("record " + r.id + ": image_ref is empty");
}

inline void validate(const Explanation& e) {
  if (e.scenario_id.empty()) throw SchemaError("explanation scenario_id is empty");
  if (is_blank(e.text)) throw SchemaError("explanation for " + e.scenario_id + ": text is empty");
  const bool needs_run = e.source == ExplanationSource::model_run;
  if (needs_run && !e.run_id)
    throw SchemaError("explanation for " + e.scenario_id + ": model_run source requires run_id");
  if (!needs_run && e.run_id)
    throw SchemaError("explanation for " + e.scenario_id + ": run_id only allowed for model_run");
  if (e.token_count != count_tokens(e.text))
    throw SchemaError("explanation for " + e.scenario_id + ": token_count " +
                      std::to_string(e.token_count) + " does not match text (" +
                      std::to_string(count_tokens(e.text)) + ")");
}

// Records plus their explanations, with an id lookup. Immutable after load.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::vector<ScenarioRecord> records, std::vector<Explanation> explanations)
      : records_(std::move(records)), explanations_(std::move(explanations)) {
    reindex();
    for (const auto& r : records_) validate(r);
    for (const auto& e : explanations_) {
      validate(e);
      const auto* rec = find(e.scenario_id);
      if (!rec) throw SchemaError("explanation references unknown record '" + e.scenario_id + "'");
      if (rec->split == Split::db && e.source == ExplanationSource::human)
        throw SchemaError("record " + rec->id + " is in the db split but has a human explanation");
    }
  }

  const std::vector<ScenarioRecord>& records() const noexcept { return records_; }
  const std::vector<Explanation>& explanations() const noexcept { return explanations_; }
  std::size_t size() const noexcept { return records_.size(); }

  const ScenarioRecord* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const ScenarioRecord& at(std::string_view id) const {
    const auto* r = find(id);
    if (!r) throw PreconditionError("unknown record '" + std::string(id) + "'");
    return *r;
  }

  std::vector<const Explanation*> explanations_for(std::string_view id) const {
    std::vector<const Explanation*> out;
    for (const auto& e : explanations_)
      if (e.scenario_id == id) out.push_back(&e);
    return out;
  }

  std::vector<const ScenarioRecord*> select(std::optional<Subset> subset,
                                            std::optional<Split> split) const {
    std::vector<const ScenarioRecord*> out;
    for (const auto& r : records_)
      if ((!subset || r.subset == *subset) && (!split || r.split == *split)) out.push_back(&r);
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.records_ == b.records_ && a.explanations_ == b.explanations_;
  }

 private:
  void reindex() {
    by_id_.clear();
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (!by_id_.emplace(records_[i].id, i).second)
        throw SchemaError("duplicate record id '" + records_[i].id + "'");
    }
  }

  std::vector<ScenarioRecord> records_;
  std::vector<Explanation> explanations_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace ricl
