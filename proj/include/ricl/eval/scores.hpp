#pragma once

// Rubric scorers: FLASK-style skills (LR, LC, LE, CS) and 1-5 specificity.

#include <array>
#include <cctype>
#include <cstdio>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "ricl/core/prompts.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/template.hpp"
#include "ricl/eval/judgment.hpp"
#include "ricl/llm/chat_client.hpp"

namespace ricl {

struct SkillScores {
  int lr = 0, lc = 0, le = 0, cs = 0;

  std::array<int, 4> as_array() const { return {lr, lc, le, cs}; }
  friend bool operator==(const SkillScores&, const SkillScores&) = default;
};

inline constexpr std::array<std::string_view, 4> kSkillNames = {"LR", "LC", "LE", "CS"};

namespace detail {

inline int checked_score(long v, std::string_view what) {
  if (v < 1 || v > 5)
    throw ReplyParseError(std::string(what) + " score " + std::to_string(v) + " is outside 1..5");
  return static_cast<int>(v);
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Accepts a JSON object {"LR":3,"LC":4,"LE":4,"CS":3} (keys case-insensitive,
// possibly inside prose or a code fence), labeled pairs "LR: 3, LC: 4, ...",
// or the bare form "3/4/4/3".
inline SkillScores parse_flask_reply(std::string_view reply) {
  std::array<std::optional<long>, 4> got;
  const std::string text(reply);

  if (const auto open = text.find('{'), close = text.rfind('}');
      open != std::string::npos && close != std::string::npos && close > open) {
    try {
      const auto j = Json::parse(text.substr(open, close - open + 1));
      for (const auto& [key, value] : j.items()) {
        std::string k = key;
        for (auto& c : k) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        for (std::size_t i = 0; i < 4; ++i)
          if (k == kSkillNames[i]) {
            if (!value.is_number_integer()) throw ReplyParseError(k + " is not an integer");
            got[i] = value.get<long>();
          }
      }
    } catch (const nlohmann::json::exception&) {
    }
  }
  if (!got[0] && !got[1] && !got[2] && !got[3]) {
    static const std::regex labeled(R"(\b(LR|LC|LE|CS)\b\W{0,3}(-?\d+))", std::regex::icase);
    for (std::sregex_iterator it(text.begin(), text.end(), labeled), end; it != end; ++it) {
      std::string k = (*it)[1];
      for (auto& c : k) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      for (std::size_t i = 0; i < 4; ++i)
        if (k == kSkillNames[i]) got[i] = std::stol((*it)[2]);
    }
  }
  if (!got[0] && !got[1] && !got[2] && !got[3]) {
    static const std::regex bare(R"(^\s*(-?\d+)\s*/\s*(-?\d+)\s*/\s*(-?\d+)\s*/\s*(-?\d+)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, bare))
      for (std::size_t i = 0; i < 4; ++i) got[i] = std::stol(m[i + 1]);
  }
  for (std::size_t i = 0; i < 4; ++i)
    if (!got[i]) throw ReplyParseError("reply lacks a " + std::string(kSkillNames[i]) + " score");
  return {detail::checked_score(*got[0], "LR"), detail::checked_score(*got[1], "LC"),
          detail::checked_score(*got[2], "LE"), detail::checked_score(*got[3], "CS")};
}

inline std::string render_flask_prompt(std::string_view rubric, std::string_view context, std::string_view outcome,
                                       std::string_view explanation) {
  return render_placeholders(rubric, {{"context", std::string(context)},
                                      {"outcome", std::string(outcome)},
                                      {"explanation", std::string(explanation)}});
}

// Scores one explanation; invalid replies are retried, then ReplyParseError.
inline SkillScores flask_score(std::string_view context, std::string_view outcome, std::string_view explanation,
                               ChatClient& judge, std::string_view rubric = prompts::kFlaskRubricPrompt,
                               int retries = 3, const std::string& judge_model = {}) {
  if (is_blank(explanation)) throw PreconditionError("flask_score needs a non-empty explanation");
  const auto req = ChatRequest::text(judge_model, "", render_flask_prompt(rubric, context, outcome, explanation));
  std::string last;
  for (int a = 0; a <= retries; ++a) {
    try {
      return parse_flask_reply(judge.chat(req));
    } catch (const ReplyParseError& e) {
      last = e.what();
    }
  }
  throw ReplyParseError("no valid FLASK reply after " + std::to_string(retries + 1) + " attempts: " + last);
}

struct SkillMeans {
  std::array<double, 4> mean{};
  std::size_t count = 0;
};

inline SkillMeans mean_skills(std::span<const SkillScores> scores) {
  if (scores.empty()) throw PreconditionError("no skill scores to average");
  SkillMeans m;
  for (const auto& s : scores) {
    const auto a = s.as_array();
    for (std::size_t i = 0; i < 4; ++i) m.mean[i] += a[i];
  }
  for (auto& x : m.mean) x /= static_cast<double>(scores.size());
  m.count = scores.size();
  return m;
}

// "x.xx (+y.yy)": score followed by its signed gain over a baseline.
inline std::string format_with_gain(double value, double baseline) {
  double gain = value - baseline;
  if (std::abs(gain) < 0.005) gain = 0.0;  // avoid "-0.00"
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f (%+.2f)", value, gain);
  return buf;
}

// ---- specificity -----------------------------------------------------------

// A single integer 1..5, optionally in square brackets.
inline int parse_specificity_reply(std::string_view reply) {
  auto s = detail::trim(reply);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = detail::trim(std::string_view(s).substr(1, s.size() - 2));
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }) || s.size() > 3)
    throw ReplyParseError("specificity reply is not a single integer: '" + std::string(reply) + "'");
  return detail::checked_score(std::stol(s), "specificity");
}

inline std::string render_specificity_prompt(std::string_view text) {
  return replace_all(prompts::kSpecificityPrompt, "[Insert the generated text here]", text);
}

inline int specificity_score(std::string_view text, ChatClient& judge, int retries = 3,
                             const std::string& judge_model = {}) {
  if (is_blank(text)) throw PreconditionError("specificity_score needs non-empty text");
  const auto req = ChatRequest::text(judge_model, "", render_specificity_prompt(text));
  std::string last;
  for (int a = 0; a <= retries; ++a) {
    try {
      return parse_specificity_reply(judge.chat(req));
    } catch (const ReplyParseError& e) {
      last = e.what();
    }
  }
  throw ReplyParseError("no valid specificity reply after " + std::to_string(retries + 1) + " attempts: " + last);
}

struct SpecificityDistribution {
  std::array<std::size_t, 5> counts{};
  std::size_t total = 0;

  void add(int score) {
    ++counts.at(static_cast<std::size_t>(detail::checked_score(score, "specificity") - 1));
    ++total;
  }
  double proportion(int level) const {
    return total ? static_cast<double>(counts.at(static_cast<std::size_t>(level - 1))) / static_cast<double>(total)
                 : 0.0;
  }
  double mean() const {
    if (total == 0) throw PreconditionError("empty specificity distribution");
    double s = 0.0;
    for (int l = 1; l <= 5; ++l) s += l * static_cast<double>(counts[static_cast<std::size_t>(l - 1)]);
    return s / static_cast<double>(total);
  }
};

}  // namespace ricl
