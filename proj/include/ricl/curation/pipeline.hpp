#pragma once

// Order-fixed curation: parse -> dedupe -> keyword filter -> pairing.

#include <string>
#include <vector>

#include "ricl/core/hash.hpp"
#include "ricl/core/record.hpp"
#include "ricl/curation/filters.hpp"
#include "ricl/curation/pairing.hpp"
#include "ricl/curation/scenario_parser.hpp"

namespace ricl {

// Content-hash id, stable across pipeline stages.
inline std::string mint_scenario_id(Subset subset, const ScenarioBlock& b) {
  const auto h = Sha256()
                     .field(to_string(subset))
                     .field(b.caption)
                     .field(b.rationale)
                     .field(b.situation)
                     .hex();
  return std::string(to_string(subset)) + "-" + h.substr(0, 16);
}

inline ScenarioRecord to_record(const ScenarioBlock& b, Subset subset, std::string image_ref,
                                Split split = Split::db) {
  ScenarioRecord r;
  r.id = mint_scenario_id(subset, b);
  r.subset = subset;
  r.caption = b.caption;
  r.rationale = b.rationale;
  r.outcome = b.situation;
  r.image_ref = std::move(image_ref);
  r.split = split;
  return r;
}

struct CurationResult {
  std::string raw;  // generation output, verbatim
  ParseResult parsed;
  std::vector<ScenarioBlock> kept;
  FilterReport report;
};

inline CurationResult curate_blocks(std::string raw, double dedupe_threshold,
                                    const std::vector<std::string>& keywords, long cap) {
  CurationResult out;
  out.parsed = parse_scenario_blocks(raw);
  out.raw = std::move(raw);
  auto [deduped, r1] = dedupe(out.parsed.blocks, dedupe_threshold);
  auto [filtered, r2] = keyword_diversity_filter(std::move(deduped), keywords, cap);
  out.kept = std::move(filtered);
  out.report = r1.then(r2);
  return out;
}

}  // namespace ricl
