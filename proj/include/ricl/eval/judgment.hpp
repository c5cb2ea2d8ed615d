#pragma once

// Pairwise judgments and their line-delimited log:
//
//   {"task_id":"...","query_id":"...","left":"<source>","right":"<source>",
//    "order_seed":123,"swapped":false,"winner":"left"|"right"|"invalid",
//    "judge":"llm"|"human","annotator":"...","raw_reply":"...","attempts":1}
//
// left is output a and right is output b as passed to the judge; "swapped"
// records whether b was shown to the judge first.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/jsonl.hpp"

namespace ricl {

class ReplyParseError : public Error {
 public:
  using Error::Error;
};

enum class Winner { left, right, invalid };
enum class JudgeKind { llm, human };

inline std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::left: return "left";
    case Winner::right: return "right";
    case Winner::invalid: return "invalid";
  }
  return "?";
}
inline std::string_view to_string(JudgeKind k) { return k == JudgeKind::llm ? "llm" : "human"; }

struct PairwiseJudgment {
  std::string task_id;
  std::string query_record_id;
  std::string left_source;
  std::string right_source;
  std::uint64_t presented_order_seed = 0;
  bool swapped = false;
  Winner winner = Winner::invalid;
  JudgeKind judge = JudgeKind::llm;
  std::string annotator;
  std::string raw_reply;
  int attempts = 0;

  // Source label of the preferred output, if any.
  std::optional<std::string> winning_source() const {
    if (winner == Winner::left) return left_source;
    if (winner == Winner::right) return right_source;
    return std::nullopt;
  }

  friend bool operator==(const PairwiseJudgment&, const PairwiseJudgment&) = default;
};

inline Json to_json(const PairwiseJudgment& j) {
  Json o;
  o["task_id"] = j.task_id;
  o["query_id"] = j.query_record_id;
  o["left"] = j.left_source;
  o["right"] = j.right_source;
  o["order_seed"] = j.presented_order_seed;
  o["swapped"] = j.swapped;
  o["winner"] = to_string(j.winner);
  o["judge"] = to_string(j.judge);
  o["annotator"] = j.annotator;
  o["raw_reply"] = j.raw_reply;
  o["attempts"] = j.attempts;
  return o;
}

inline PairwiseJudgment judgment_from_json(const Json& o, std::size_t line) {
  PairwiseJudgment j;
  j.task_id = require_string(o, "task_id", line);
  j.query_record_id = require_string(o, "query_id", line);
  j.left_source = require_string(o, "left", line);
  j.right_source = require_string(o, "right", line);
  const auto w = require_string(o, "winner", line);
  if (w == "left") j.winner = Winner::left;
  else if (w == "right") j.winner = Winner::right;
  else if (w == "invalid") j.winner = Winner::invalid;
  else throw SchemaError("unknown winner '" + w + "'", line);
  const auto k = require_string(o, "judge", line);
  if (k != "llm" && k != "human") throw SchemaError("unknown judge kind '" + k + "'", line);
  j.judge = k == "llm" ? JudgeKind::llm : JudgeKind::human;
  try {
    j.presented_order_seed = o.value("order_seed", std::uint64_t{0});
    j.swapped = o.value("swapped", false);
    j.annotator = o.value("annotator", "");
    j.raw_reply = o.value("raw_reply", "");
    j.attempts = o.value("attempts", 0);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed judgment: ") + e.what(), line);
  }
  return j;
}

inline std::vector<PairwiseJudgment> load_judgments(const std::filesystem::path& path) {
  std::vector<PairwiseJudgment> out;
  for_each_jsonl(path, [&](const Json& o, std::size_t line) { out.push_back(judgment_from_json(o, line)); });
  return out;
}

struct WinRate {
  double rate = 0.0;
  std::size_t wins = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
};

// Share of valid judgments won by `candidate`. Judgments not involving the
// candidate are ignored; invalid ones are counted but excluded from the
// denominator.
inline WinRate win_rate(std::span<const PairwiseJudgment> judgments, std::string_view candidate) {
  WinRate w;
  for (const auto& j : judgments) {
    if (j.left_source != candidate && j.right_source != candidate) continue;
    if (j.winner == Winner::invalid) {
      ++w.invalid;
      continue;
    }
    ++w.valid;
    if (*j.winning_source() == candidate) ++w.wins;
  }
  if (w.valid == 0) throw PreconditionError("no valid judgments for '" + std::string(candidate) + "'");
  w.rate = static_cast<double>(w.wins) / static_cast<double>(w.valid);
  return w;
}

}  // namespace ricl
