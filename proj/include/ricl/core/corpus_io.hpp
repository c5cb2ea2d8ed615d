#pragma once

// Corpus file: line-delimited JSON, documented in docs/corpus_schema.md.
//
//   # ricl-corpus v1
//   {"type":"record","id":...,"subset":"vis","split":"db","caption":...,
//    "rationale":...,"outcome":...,"image_ref":...,"categories":[...]}
//   {"type":"explanation","scenario_id":...,"source":"llm","text":...,
//    "run_id":null,"token_count":12}
//
// Records are written before explanations, each in input order, with a fixed
// key order, so save(load(f)) is byte-identical for files this module wrote.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ricl/core/jsonl.hpp"
#include "ricl/core/record.hpp"

namespace ricl {

inline constexpr std::string_view kCorpusHeader = "# ricl-corpus v1";

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string, std::less<>>& allowed,
                                std::size_t line) {
  for (const auto& [k, _] : j.items())
    if (!allowed.contains(k)) throw SchemaError("unknown field '" + k + "'", line);
}

inline ScenarioRecord record_from_json(const Json& j, std::size_t line) {
  static const std::set<std::string, std::less<>> kKeys{
      "type", "id", "subset", "split", "caption", "rationale", "outcome", "image_ref", "categories"};
  reject_unknown_keys(j, kKeys, line);
  ScenarioRecord r;
  r.id = require_string(j, "id", line);
  const auto subset = require_string(j, "subset", line);
  const auto split = require_string(j, "split", line);
  auto s = parse_subset(subset);
  if (!s) throw SchemaError("unknown subset '" + subset + "'", line);
  auto sp = parse_split(split);
  if (!sp) throw SchemaError("unknown split '" + split + "'", line);
  r.subset = *s;
  r.split = *sp;
  r.caption = require_string(j, "caption", line);
  r.rationale = j.contains("rationale") ? require_string(j, "rationale", line, true) : "";
  r.outcome = require_string(j, "outcome", line);
  r.image_ref = require_string(j, "image_ref", line);
  if (auto it = j.find("categories"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("field 'categories' must be an array", line);
    for (const auto& c : *it) {
      if (!c.is_string()) throw SchemaError("categories must be strings", line);
      r.categories.push_back(c.get<std::string>());
    }
  }
  if (is_blank(r.caption)) throw SchemaError("field 'caption' is blank", line);
  if (is_blank(r.outcome)) throw SchemaError("field 'outcome' is blank", line);
  return r;
}

inline Explanation explanation_from_json(const Json& j, std::size_t line) {
  static const std::set<std::string, std::less<>> kKeys{"type",   "scenario_id", "source",
                                                        "text",   "run_id",      "token_count"};
  reject_unknown_keys(j, kKeys, line);
  Explanation e;
  e.scenario_id = require_string(j, "scenario_id", line);
  const auto src = require_string(j, "source", line);
  auto s = parse_source(src);
  if (!s) throw SchemaError("unknown source '" + src + "'", line);
  e.source = *s;
  e.text = require_string(j, "text", line);
  if (auto it = j.find("run_id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("field 'run_id' must be a string or null", line);
    e.run_id = it->get<std::string>();
  }
  e.token_count = count_tokens(e.text);
  if (auto it = j.find("token_count"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      throw SchemaError("field 'token_count' must be a non-negative integer", line);
    if (it->get<std::size_t>() != e.token_count)
      throw SchemaError("token_count does not match text", line);
  }
  try {
    validate(e);
  } catch (const SchemaError& err) {
    throw SchemaError(err.what(), line);
  }
  return e;
}

}  // namespace detail

inline Json to_json(const ScenarioRecord& r) {
  Json j;
  j["type"] = "record";
  j["id"] = r.id;
  j["subset"] = to_string(r.subset);
  j["split"] = to_string(r.split);
  j["caption"] = r.caption;
  j["rationale"] = r.rationale;
  j["outcome"] = r.outcome;
  j["image_ref"] = r.image_ref;
  j["categories"] = r.categories;
  return j;
}

inline Json to_json(const Explanation& e) {
  Json j;
  j["type"] = "explanation";
  j["scenario_id"] = e.scenario_id;
  j["source"] = to_string(e.source);
  j["text"] = e.text;
  j["run_id"] = e.run_id ? Json(*e.run_id) : Json(nullptr);
  j["token_count"] = e.token_count;
  return j;
}

inline Corpus load_corpus(const std::filesystem::path& path) {
  std::vector<ScenarioRecord> records;
  std::vector<Explanation> explanations;
  std::vector<std::size_t> expl_lines;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    const auto type = require_string(j, "type", line);
    if (type == "record") {
      auto r = detail::record_from_json(j, line);
      if (auto [it, fresh] = seen.emplace(r.id, line); !fresh)
        throw SchemaError("duplicate id '" + r.id + "' (first seen on line " +
                              std::to_string(it->second) + ")",
                          line);
      records.push_back(std::move(r));
    } else if (type == "explanation") {
      explanations.push_back(detail::explanation_from_json(j, line));
      expl_lines.push_back(line);
    } else {
      throw SchemaError("unknown type '" + type + "'", line);
    }
  });
  for (std::size_t i = 0; i < explanations.size(); ++i)
    if (!seen.contains(explanations[i].scenario_id))
      throw SchemaError("explanation references unknown record '" + explanations[i].scenario_id +
                            "'",
                        expl_lines[i]);
  return Corpus(std::move(records), std::move(explanations));
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out(kCorpusHeader);
  out.push_back('\n');
  for (const auto& r : corpus.records()) {
    out += dump_line(to_json(r));
    out.push_back('\n');
  }
  for (const auto& e : corpus.explanations()) {
    out += dump_line(to_json(e));
    out.push_back('\n');
  }
  return out;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  const auto text = serialize_corpus(corpus);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ricl
