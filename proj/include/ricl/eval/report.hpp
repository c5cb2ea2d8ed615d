#pragma once

// Result tables. A condition is one experiment of the grid, labeled by its
// manifest stem ("<model>_<subset>_<shots>shot_<mode>"). Win rates are the
// condition's share of valid judgments against the reference explanations.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ricl/eval/judgment.hpp"
#include "ricl/eval/scores.hpp"
#include "ricl/icl/config.hpp"

namespace ricl {

struct Condition {
  std::string model;
  Subset subset = Subset::vis;
  int shots = 0;
  ExemplarMode mode = ExemplarMode::none;

  std::string label() const {
    ExperimentConfig c;
    c.model_id = model;
    c.subset = subset;
    c.shots = shots;
    c.mode = mode;
    return manifest_stem(c);
  }
  auto key() const { return std::tuple(model, subset, shots, mode); }
  friend bool operator<(const Condition& a, const Condition& b) { return a.key() < b.key(); }
  friend bool operator==(const Condition& a, const Condition& b) { return a.key() == b.key(); }
};

inline std::optional<Condition> parse_condition(std::string_view label) {
  const auto p3 = label.rfind('_');
  if (p3 == std::string_view::npos) return std::nullopt;
  const auto p2 = label.rfind('_', p3 - 1);
  if (p2 == std::string_view::npos || p2 == 0) return std::nullopt;
  const auto p1 = label.rfind('_', p2 - 1);
  if (p1 == std::string_view::npos || p1 == 0) return std::nullopt;
  Condition c;
  c.model = std::string(label.substr(0, p1));
  const auto subset = parse_subset(label.substr(p1 + 1, p2 - p1 - 1));
  const auto shots = label.substr(p2 + 1, p3 - p2 - 1);
  const auto mode = parse_mode(label.substr(p3 + 1));
  if (!subset || !mode || shots.size() < 5 || shots.substr(shots.size() - 4) != "shot") return std::nullopt;
  const auto digits = shots.substr(0, shots.size() - 4);
  if (digits.size() != 1 || digits[0] < '0' || digits[0] > '9') return std::nullopt;
  c.subset = *subset;
  c.shots = digits[0] - '0';
  c.mode = *mode;
  return c;
}

inline std::vector<Condition> grid_conditions(const std::string& model, Subset subset) {
  std::vector<Condition> out;
  ExperimentConfig base;
  base.model_id = model;
  base.subset = subset;
  for (const auto& c : experiment_grid(base)) out.push_back({model, subset, c.shots, c.mode});
  return out;
}

struct ShotDelta {
  std::string model;
  Subset subset;
  int shots;
  double random_rate;
  double retrieved_rate;
  double delta() const { return retrieved_rate - random_rate; }
};

struct ComboSummary {
  std::string model;
  Subset subset;
  bool complete = false;
  double random_mean = 0.0;     // over shots 1, 3, 5
  double retrieved_mean = 0.0;
  bool retrieved_at_least_random() const { return complete && retrieved_mean >= random_mean; }
};

struct Report {
  std::vector<std::string> models;
  std::vector<Subset> subsets;
  std::map<Condition, WinRate> cells;
  std::vector<std::string> missing;  // expected conditions without a valid judgment
  std::vector<ShotDelta> deltas;
  std::vector<ComboSummary> combos;
  std::size_t combos_won = 0;
  std::size_t combos_complete = 0;
  std::optional<double> median_model_gain;
  // Alternative ways of averaging the R-ICL gain; none is singled out.
  std::vector<std::pair<std::string, double>> candidate_aggregates;

  std::string summary_line() const {
    return std::to_string(combos_won) + " of " + std::to_string(combos_complete);
  }
};

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) throw PreconditionError("median of an empty list");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

inline Report build_report(const std::map<Condition, WinRate>& cells) {
  Report r;
  r.cells = cells;
  std::set<std::string> models;
  std::set<Subset> subsets;
  for (const auto& [c, w] : cells) {
    models.insert(c.model);
    subsets.insert(c.subset);
  }
  r.models.assign(models.begin(), models.end());
  r.subsets.assign(subsets.begin(), subsets.end());

  for (const auto& m : r.models)
    for (auto s : r.subsets)
      for (const auto& c : grid_conditions(m, s))
        if (!cells.contains(c)) r.missing.push_back(c.label());

  std::map<std::string, std::vector<double>> per_model_deltas;
  std::vector<double> all_deltas, relative, best_shot;
  for (const auto& m : r.models) {
    for (auto s : r.subsets) {
      ComboSummary combo{m, s};
      combo.complete = true;
      double best = -2.0;
      for (int shots : {1, 3, 5}) {
        auto rnd = cells.find({m, s, shots, ExemplarMode::random});
        auto ret = cells.find({m, s, shots, ExemplarMode::retrieved});
        if (rnd == cells.end() || ret == cells.end()) {
          combo.complete = false;
          continue;
        }
        ShotDelta d{m, s, shots, rnd->second.rate, ret->second.rate};
        r.deltas.push_back(d);
        per_model_deltas[m].push_back(d.delta());
        all_deltas.push_back(d.delta());
        if (d.random_rate > 0) relative.push_back(d.delta() / d.random_rate);
        best = std::max(best, d.delta());
        combo.random_mean += d.random_rate / 3.0;
        combo.retrieved_mean += d.retrieved_rate / 3.0;
      }
      if (combo.complete) {
        ++r.combos_complete;
        if (combo.retrieved_at_least_random()) ++r.combos_won;
        best_shot.push_back(best);
      }
      r.combos.push_back(combo);
    }
  }
  std::vector<double> model_gains;
  for (const auto& [m, ds] : per_model_deltas) {
    double s = 0;
    for (double d : ds) s += d;
    model_gains.push_back(s / static_cast<double>(ds.size()));
  }
  if (!model_gains.empty()) r.median_model_gain = median_of(model_gains);

  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  if (!all_deltas.empty()) {
    r.candidate_aggregates.emplace_back("mean_delta_over_cells", mean(all_deltas));
    r.candidate_aggregates.emplace_back("median_delta_over_cells", median_of(all_deltas));
    r.candidate_aggregates.emplace_back("mean_model_gain", mean(model_gains));
  }
  if (!relative.empty()) r.candidate_aggregates.emplace_back("mean_relative_gain_over_cells", mean(relative));
  if (!best_shot.empty()) r.candidate_aggregates.emplace_back("mean_best_shot_delta_over_combos", mean(best_shot));
  return r;
}

// Win rates of every condition label found in the judgments against
// `reference` (e.g. "human_llm").
inline std::map<Condition, WinRate> condition_win_rates(std::span<const PairwiseJudgment> judgments,
                                                        std::string_view reference) {
  std::map<std::string, std::vector<PairwiseJudgment>> by_label;
  for (const auto& j : judgments) {
    if (j.left_source == reference && parse_condition(j.right_source)) by_label[j.right_source].push_back(j);
    else if (j.right_source == reference && parse_condition(j.left_source)) by_label[j.left_source].push_back(j);
  }
  std::map<Condition, WinRate> out;
  for (const auto& [label, js] : by_label) {
    try {
      out[*parse_condition(label)] = win_rate(js, label);
    } catch (const PreconditionError&) {
      // only invalid judgments: leave the cell missing
    }
  }
  return out;
}

namespace detail {

inline std::string pct(double x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

inline std::string setting_name(int shots, ExemplarMode mode) {
  if (shots == 0) return "0-shot";
  return std::string(mode == ExemplarMode::retrieved ? "R-ICL " : "random ") + std::to_string(shots) + "-shot";
}

}  // namespace detail

inline std::string render_report_text(const Report& r) {
  std::string out;
  std::size_t mw = 5;
  for (const auto& m : r.models) mw = std::max(mw, m.size());
  out += detail::pad("model", mw + 2) + detail::pad("setting", 16);
  for (auto s : r.subsets) out += detail::pad(std::string(to_string(s)), 18);
  out += "\n";
  for (const auto& m : r.models) {
    bool first = true;
    for (const auto& c : grid_conditions(m, Subset::vis)) {
      out += detail::pad(first ? m : "", mw + 2) + detail::pad(detail::setting_name(c.shots, c.mode), 16);
      first = false;
      for (auto s : r.subsets) {
        auto it = r.cells.find({m, s, c.shots, c.mode});
        std::string cell = "missing";
        if (it != r.cells.end())
          cell = detail::pct(it->second.rate) + " (" + std::to_string(it->second.wins) + "/" +
                 std::to_string(it->second.valid) + ")";
        out += detail::pad(cell, 18);
      }
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += "\n";
    }
  }
  out += "\nR-ICL minus random (percentage points)\n";
  for (const auto& d : r.deltas) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s %d-shot: %+.1f\n", d.model.c_str(), std::string(to_string(d.subset)).c_str(),
                  d.shots, 100.0 * d.delta());
    out += buf;
  }
  out += "\nR-ICL >= random (mean over 1/3/5 shots): " + r.summary_line() + " model-subset combinations\n";
  if (r.median_model_gain) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "median gain across models: %+.1f points\n", 100.0 * *r.median_model_gain);
    out += buf;
  }
  if (!r.candidate_aggregates.empty()) {
    out += "candidate aggregates:\n";
    for (const auto& [name, v] : r.candidate_aggregates) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %s: %+.4f\n", name.c_str(), v);
      out += buf;
    }
  }
  if (!r.missing.empty()) {
    out += "missing cells:\n";
    for (const auto& m : r.missing) out += "  " + m + "\n";
  }
  return out;
}

inline Json to_json(const Report& r) {
  Json j;
  j["cells"] = Json::array();
  for (const auto& [c, w] : r.cells)
    j["cells"].push_back({{"condition", c.label()},
                          {"model", c.model},
                          {"subset", to_string(c.subset)},
                          {"shots", c.shots},
                          {"mode", to_string(c.mode)},
                          {"wins", w.wins},
                          {"valid", w.valid},
                          {"invalid", w.invalid},
                          {"rate", w.rate}});
  j["deltas"] = Json::array();
  for (const auto& d : r.deltas)
    j["deltas"].push_back({{"model", d.model},
                           {"subset", to_string(d.subset)},
                           {"shots", d.shots},
                           {"random", d.random_rate},
                           {"retrieved", d.retrieved_rate},
                           {"delta", d.delta()}});
  j["combos_won"] = r.combos_won;
  j["combos_complete"] = r.combos_complete;
  j["summary"] = r.summary_line();
  j["median_model_gain"] = r.median_model_gain ? Json(*r.median_model_gain) : Json(nullptr);
  j["candidate_aggregates"] = Json::object();
  for (const auto& [n, v] : r.candidate_aggregates) j["candidate_aggregates"][n] = v;
  j["missing"] = r.missing;
  return j;
}

inline std::string report_cells_csv(const Report& r) {
  std::string out = "condition,model,subset,shots,mode,wins,valid,invalid,rate\n";
  char buf[64];
  for (const auto& [c, w] : r.cells) {
    std::snprintf(buf, sizeof buf, "%.6f", w.rate);
    out += c.label() + "," + c.model + "," + std::string(to_string(c.subset)) + "," + std::to_string(c.shots) + "," +
           std::string(to_string(c.mode)) + "," + std::to_string(w.wins) + "," + std::to_string(w.valid) + "," +
           std::to_string(w.invalid) + "," + buf + "\n";
  }
  return out;
}

// ---- skill-score table -----------------------------------------------------

struct FlaskRow {
  std::string model;
  SkillMeans random;
  SkillMeans retrieved;
};

// One row per model: the R-ICL mean of each skill with its gain over the
// random baseline in parentheses.
inline std::string render_flask_table(std::span<const FlaskRow> rows) {
  std::size_t mw = 5;
  for (const auto& r : rows) mw = std::max(mw, r.model.size());
  std::string out = detail::pad("model", mw + 2);
  for (auto name : kSkillNames) out += detail::pad(std::string(name), 16);
  while (out.back() == ' ') out.pop_back();
  out += "\n";
  for (const auto& r : rows) {
    std::string line = detail::pad(r.model, mw + 2);
    for (std::size_t i = 0; i < 4; ++i) line += detail::pad(format_with_gain(r.retrieved.mean[i], r.random.mean[i]), 16);
    while (line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace ricl
