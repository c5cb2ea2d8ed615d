#pragma once

// Synthetic corpora with deterministic embeddings, shared by unit tests and
// the acceptance binary.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "ricl/core/record.hpp"
#include "ricl/embedding/gateway.hpp"
#include "ricl/retrieval/index.hpp"

namespace ricl::testing {

struct SyntheticWorld {
  Corpus corpus;
  std::map<std::string, RecordEmbeddings> embeddings;
  std::map<Subset, MerIndex> indexes;  // db records of each subset

  RecordEmbeddings embed(const ScenarioRecord& r) const { return embeddings.at(r.id); }
};

inline std::string synthetic_id(Subset s, Split sp, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return std::string(to_string(s)) + "-" + std::string(to_string(sp)) + "-" + buf;
}

inline SyntheticWorld synthetic_world(std::uint64_t seed, std::size_t db_per_subset, std::size_t test_per_subset,
                                      std::size_t dim = 16) {
  static const char* kThings[] = {"bread", "milk", "kettle", "bicycle", "window", "plant", "mirror", "coat"};
  static const char* kStates[] = {"cracked", "steaming", "frosted", "wilted", "dusty", "dripping", "bent", "faded"};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto unit = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = nd(gen);
    return normalize(v);
  };
  std::vector<ScenarioRecord> records;
  std::vector<Explanation> explanations;
  SyntheticWorld w;
  for (Subset s : {Subset::vis, Subset::lang}) {
    for (Split sp : {Split::db, Split::test}) {
      const auto n = sp == Split::db ? db_per_subset : test_per_subset;
      for (std::size_t i = 0; i < n; ++i) {
        ScenarioRecord r;
        r.id = synthetic_id(s, sp, i);
        r.subset = s;
        r.split = sp;
        const auto* thing = kThings[(i * 3 + (s == Subset::lang)) % 8];
        const auto* state = kStates[(i * 5 + (sp == Split::test)) % 8];
        r.caption = std::string(state) + " " + thing + " number " + std::to_string(i);
        r.outcome = "Person kept using the " + std::string(thing) + " " + std::to_string(i) + " happily.";
        r.image_ref = "img/" + r.id + ".png";
        records.push_back(r);
        if (sp == Split::db) {
          explanations.push_back(make_explanation(r.id, ExplanationSource::llm,
                                                  "Because the " + std::string(thing) + " was only " + state +
                                                      " on the surface."));
        } else {
          explanations.push_back(make_explanation(r.id, ExplanationSource::human, "It was fine."));
          explanations.push_back(make_explanation(r.id, ExplanationSource::human_llm,
                                                  "The " + std::string(state) + " look of the " + thing +
                                                      " was harmless, so the person could use it."));
        }
        w.embeddings[r.id] = {unit(), unit()};
      }
    }
  }
  w.corpus = Corpus(std::move(records), std::move(explanations));
  for (Subset s : {Subset::vis, Subset::lang}) {
    std::vector<IndexedEntry> entries;
    for (const auto* r : w.corpus.select(s, Split::db))
      entries.push_back({r->id, w.embeddings[r->id].image, w.embeddings[r->id].text});
    if (!entries.empty()) w.indexes.emplace(s, build_index(entries));
  }
  return w;
}

}  // namespace ricl::testing
