#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ricl/core/prompts.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/rng.hpp"
#include "ricl/core/template.hpp"
#include "ricl/eval/judgment.hpp"
#include "ricl/llm/chat_client.hpp"

namespace ricl {

namespace detail {

// Body of the first ``` fence, or the whole reply when there is none.
inline std::string_view strip_code_fence(std::string_view s) {
  const auto open = s.find("```");
  if (open == std::string_view::npos) return s;
  auto body = s.find('\n', open);
  if (body == std::string_view::npos) return s;
  ++body;
  const auto close = s.find("```", body);
  return s.substr(body, close == std::string_view::npos ? std::string_view::npos : close - body);
}

// The first balanced [...] span, ignoring brackets inside quotes.
inline std::optional<std::string_view> first_bracket_list(std::string_view s) {
  const auto start = s.find('[');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  char quote = 0;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    else if (c == '[') ++depth;
    else if (c == ']' && --depth == 0) return s.substr(start, i - start + 1);
  }
  return std::nullopt;
}

}  // namespace detail

// Parses the judge's ranking list, e.g.
//   [{"model": "model_1", "rank": 1}, {"model": "model_2", "rank": 2}]
// Python-style single quotes are accepted. Returns labels best first.
inline std::vector<std::string> parse_ranking(std::string_view raw_reply,
                                              const std::set<std::string>& labels = {"model_1", "model_2"}) {
  const auto list = detail::first_bracket_list(detail::strip_code_fence(raw_reply));
  if (!list) throw ReplyParseError("no ranking list in reply");
  Json j;
  try {
    j = Json::parse(*list);
  } catch (const nlohmann::json::exception&) {
    std::string fixed(*list);
    std::replace(fixed.begin(), fixed.end(), '\'', '"');
    try {
      j = Json::parse(fixed);
    } catch (const nlohmann::json::exception& e) {
      throw ReplyParseError(std::string("ranking list is not a literal: ") + e.what());
    }
  }
  if (!j.is_array() || j.empty()) throw ReplyParseError("ranking is not a non-empty list");
  std::map<long, std::string> by_rank;
  std::set<std::string> seen;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("model") || !item.contains("rank"))
      throw ReplyParseError("ranking entries need 'model' and 'rank'");
    if (!item["model"].is_string()) throw ReplyParseError("model name must be a string");
    const auto model = item["model"].get<std::string>();
    if (!labels.contains(model)) throw ReplyParseError("unknown model label '" + model + "'");
    if (!seen.insert(model).second) throw ReplyParseError("model '" + model + "' ranked twice");
    long rank = 0;
    if (item["rank"].is_number_integer()) {
      rank = item["rank"].get<long>();
    } else if (item["rank"].is_string()) {
      try {
        std::size_t used = 0;
        const auto s = item["rank"].get<std::string>();
        rank = std::stol(s, &used);
        if (used != s.size()) throw ReplyParseError("rank is not an integer");
      } catch (const std::logic_error&) {
        throw ReplyParseError("rank is not an integer");
      }
    } else {
      throw ReplyParseError("rank is not an integer");
    }
    if (!by_rank.emplace(rank, model).second) throw ReplyParseError("duplicate rank " + std::to_string(rank));
  }
  const long n = static_cast<long>(by_rank.size());
  if (by_rank.begin()->first != 1 || by_rank.rbegin()->first != n)
    throw ReplyParseError("ranks are not a permutation of 1.." + std::to_string(n));
  std::vector<std::string> out;
  for (auto& [rank, model] : by_rank) out.push_back(std::move(model));
  return out;
}

inline std::string render_judge_prompt(std::string_view instruction, std::string_view output_1,
                                       std::string_view output_2) {
  return render_placeholders(prompts::kJudgePairwisePrompt, {{"instruction", std::string(instruction)},
                                                             {"output_1", std::string(output_1)},
                                                             {"output_2", std::string(output_2)}});
}

inline std::string judge_system_prompt() {
  std::string s(prompts::kJudgeSystemPrompt);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// Whether output b is shown first: the top bit of the first mt19937_64 draw
// seeded with `order_seed`.
inline bool presentation_swapped(std::uint64_t order_seed) { return Rng(RngSeed{order_seed}).coin(); }

struct JudgeInputs {
  std::string task_id;
  std::string query_record_id;
  std::string instruction;
  std::string output_a;
  std::string output_b;
  std::string source_a;
  std::string source_b;
};

// Asks the judge to rank outputs a and b, shown in a seed-determined order.
// Transport failures and unparseable replies are retried; after the last
// attempt the judgment is recorded as invalid.
inline PairwiseJudgment judge_pairwise(const JudgeInputs& in, ChatClient& judge, std::uint64_t order_seed,
                                       int retries = 3, const std::string& judge_model = {}) {
  if (is_blank(in.output_a) || is_blank(in.output_b))
    throw PreconditionError("judge_pairwise needs two non-empty outputs");
  PairwiseJudgment j;
  j.task_id = in.task_id;
  j.query_record_id = in.query_record_id;
  j.left_source = in.source_a;
  j.right_source = in.source_b;
  j.presented_order_seed = order_seed;
  j.swapped = presentation_swapped(order_seed);
  j.judge = JudgeKind::llm;
  const auto& first = j.swapped ? in.output_b : in.output_a;
  const auto& second = j.swapped ? in.output_a : in.output_b;
  const auto request =
      ChatRequest::text(judge_model, judge_system_prompt(), render_judge_prompt(in.instruction, first, second));
  for (int a = 0; a <= retries; ++a) {
    ++j.attempts;
    try {
      j.raw_reply = judge.chat(request);
      const auto ranking = parse_ranking(j.raw_reply);
      const bool first_won = ranking.front() == "model_1";
      j.winner = (first_won != j.swapped) ? Winner::left : Winner::right;
      return j;
    } catch (const ReplyParseError&) {
    } catch (const ProviderError& e) {
      j.raw_reply = std::string("error: ") + e.what();
    }
  }
  j.winner = Winner::invalid;
  return j;
}

}  // namespace ricl
