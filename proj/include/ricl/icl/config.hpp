#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/jsonl.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/rng.hpp"

namespace ricl {

enum class ExemplarMode { none, random, retrieved };

inline std::string_view to_string(ExemplarMode m) {
  switch (m) {
    case ExemplarMode::none: return "none";
    case ExemplarMode::random: return "random";
    case ExemplarMode::retrieved: return "retrieved";
  }
  return "?";
}

inline std::optional<ExemplarMode> parse_mode(std::string_view s) {
  if (s == "none") return ExemplarMode::none;
  if (s == "random") return ExemplarMode::random;
  if (s == "retrieved") return ExemplarMode::retrieved;
  return std::nullopt;
}

struct ExperimentConfig {
  std::string model_id;
  int shots = 0;
  ExemplarMode mode = ExemplarMode::none;
  double alpha = 0.4;
  std::size_t k_pool = 20;
  RngSeed seed{0};
  Subset subset = Subset::vis;

  void validate() const {
    if (model_id.empty()) throw PreconditionError("model_id is empty");
    if (shots != 0 && shots != 1 && shots != 3 && shots != 5)
      throw PreconditionError("shots must be one of 0, 1, 3, 5 (got " + std::to_string(shots) + ")");
    if ((shots == 0) != (mode == ExemplarMode::none))
      throw PreconditionError("mode must be 'none' exactly when shots is 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("alpha must be in [0, 1]");
    if (k_pool < static_cast<std::size_t>(shots)) throw PreconditionError("k_pool must be >= shots");
  }

  // Normalizes the zero-shot case so that {0, random} and {0, retrieved}
  // name the same experiment.
  ExperimentConfig canonical() const {
    ExperimentConfig c = *this;
    if (c.shots == 0) c.mode = ExemplarMode::none;
    return c;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["model_id"] = c.model_id;
  j["subset"] = to_string(c.subset);
  j["shots"] = c.shots;
  j["mode"] = to_string(c.mode);
  j["alpha"] = c.alpha;
  j["k_pool"] = c.k_pool;
  j["seed"] = c.seed.value;
  return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.model_id = j.at("model_id").get<std::string>();
    const auto subset = parse_subset(j.at("subset").get<std::string>());
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!subset || !mode) throw PreconditionError("bad subset or mode in config");
    c.subset = *subset;
    c.mode = *mode;
    c.shots = j.at("shots").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.k_pool = j.at("k_pool").get<std::size_t>();
    c.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

// Shots {0,1,3,5} x {random, retrieved}, with the two zero-shot runs merged.
inline std::vector<ExperimentConfig> experiment_grid(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  for (int shots : {0, 1, 3, 5}) {
    for (auto mode : {ExemplarMode::random, ExemplarMode::retrieved}) {
      ExperimentConfig c = base;
      c.shots = shots;
      c.mode = mode;
      c = c.canonical();
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  return out;
}

// File stem for a config's manifest, e.g. "gpt-4o_vis_3shot_retrieved".
inline std::string manifest_stem(const ExperimentConfig& c) {
  std::string model;
  for (char ch : c.model_id) model += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') ? ch : '_';
  return model + "_" + std::string(to_string(c.subset)) + "_" + std::to_string(c.shots) + "shot_" +
         std::string(to_string(c.mode));
}

}  // namespace ricl
