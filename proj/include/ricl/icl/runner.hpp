#pragma once

// Experiment runner. The manifest is JSONL:
//
//   {"type":"header","format":"ricl-manifest v1","config":{...},"template":"<sha256>","started_at":"..."}
//   {"type":"entry","index":0,"query_id":"...","prompt_hash":"...","exemplar_ids":[...],
//    "reply":"..."|null,"latency_ms":12,"attempts":1,"error":null|"..."}
//   ...one entry per test record of the subset, in corpus order...
//   {"type":"footer","finished_at":"...","entries":N,"failures":F}
//
// Entries are appended in index order as they complete, so an interrupted
// run leaves a valid prefix. Rerunning with the same config resumes after
// the last complete entry.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <optional>
#include <thread>

#include "ricl/core/jsonl.hpp"
#include "ricl/core/parallel.hpp"
#include "ricl/icl/config.hpp"
#include "ricl/icl/exemplars.hpp"
#include "ricl/icl/prompt.hpp"

namespace ricl {

inline constexpr std::string_view kManifestFormat = "ricl-manifest v1";

class RunAborted : public Error {
 public:
  using Error::Error;
};

struct ManifestEntry {
  std::size_t index = 0;
  std::string query_id;
  std::string prompt_hash;
  std::vector<std::string> exemplar_ids;
  std::optional<std::string> reply;
  std::int64_t latency_ms = 0;
  int attempts = 0;
  std::optional<std::string> error;
};

struct RunManifest {
  ExperimentConfig config;
  std::string template_digest;
  std::string started_at;
  std::optional<std::string> finished_at;
  std::vector<ManifestEntry> entries;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [](const auto& e) { return e.error.has_value(); }));
  }
};

struct RunOptions {
  std::size_t max_in_flight = 4;
  int retries = 3;
  std::chrono::milliseconds backoff_base{250};
  double max_failure_rate = 0.2;
  bool durable = true;
  // Milliseconds since the epoch; tests pin it.
  std::function<std::int64_t()> now_ms = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  // Stop after this many new entries; simulates an interrupted run.
  std::optional<std::size_t> stop_after;
};

inline std::string iso8601_utc(std::int64_t ms) {
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms % 1000));
  return out;
}

inline Json to_json(const ManifestEntry& e) {
  Json j;
  j["type"] = "entry";
  j["index"] = e.index;
  j["query_id"] = e.query_id;
  j["prompt_hash"] = e.prompt_hash;
  j["exemplar_ids"] = e.exemplar_ids;
  j["reply"] = e.reply ? Json(*e.reply) : Json(nullptr);
  j["latency_ms"] = e.latency_ms;
  j["attempts"] = e.attempts;
  j["error"] = e.error ? Json(*e.error) : Json(nullptr);
  return j;
}

inline ManifestEntry entry_from_json(const Json& j, std::size_t line) {
  ManifestEntry e;
  try {
    e.index = j.at("index").get<std::size_t>();
    e.query_id = j.at("query_id").get<std::string>();
    e.prompt_hash = j.at("prompt_hash").get<std::string>();
    e.exemplar_ids = j.at("exemplar_ids").get<std::vector<std::string>>();
    if (!j.at("reply").is_null()) e.reply = j["reply"].get<std::string>();
    e.latency_ms = j.at("latency_ms").get<std::int64_t>();
    e.attempts = j.at("attempts").get<int>();
    if (!j.at("error").is_null()) e.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("malformed manifest entry: ") + ex.what(), line);
  }
  return e;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  RunManifest m;
  bool have_header = false;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    const auto type = j.value("type", "");
    if (type == "header") {
      if (j.value("format", "") != kManifestFormat) throw SchemaError("unknown manifest format", line);
      m.config = config_from_json(j.at("config"));
      m.template_digest = j.value("template", "");
      m.started_at = j.value("started_at", "");
      have_header = true;
    } else if (type == "entry") {
      if (!have_header) throw SchemaError("entry before header", line);
      auto e = entry_from_json(j, line);
      if (e.index != m.entries.size()) throw SchemaError("manifest entries out of order", line);
      m.entries.push_back(std::move(e));
    } else if (type == "footer") {
      m.finished_at = j.value("finished_at", "");
    } else {
      throw SchemaError("unknown manifest line type '" + type + "'", line);
    }
  });
  if (!have_header) throw SchemaError("manifest has no header", 0);
  return m;
}

// Test records of the configured subset, in corpus order.
inline std::vector<const ScenarioRecord*> experiment_queries(const Corpus& corpus, Subset subset) {
  return corpus.select(subset, Split::test);
}

struct RunContext {
  const Corpus& corpus;
  const MerIndex* index = nullptr;
  QueryEmbedder embed;
  IclTemplate tmpl = IclTemplate::builtin();
  ImageResolver images;
};

inline RunManifest run_experiment(const ExperimentConfig& config_in, const RunContext& ctx, ChatClient& model,
                                  const std::filesystem::path& manifest_path, const RunOptions& opt = {}) {
  const auto config = config_in.canonical();
  config.validate();
  const auto queries = experiment_queries(ctx.corpus, config.subset);
  const auto digest = ctx.tmpl.digest();

  // Resume or start.
  std::size_t done = 0;
  bool finished = false;
  std::error_code ec;
  if (std::filesystem::exists(manifest_path, ec) && std::filesystem::file_size(manifest_path, ec) > 0) {
    truncate_partial_tail(manifest_path);
  }
  if (std::filesystem::exists(manifest_path, ec) && std::filesystem::file_size(manifest_path, ec) > 0) {
    const auto prior = load_manifest(manifest_path);
    if (!(prior.config == config) || prior.template_digest != digest)
      throw PreconditionError("manifest " + manifest_path.string() + " belongs to a different experiment");
    if (prior.entries.size() > queries.size()) throw PreconditionError("manifest has more entries than queries");
    for (std::size_t i = 0; i < prior.entries.size(); ++i)
      if (prior.entries[i].query_id != queries[i]->id)
        throw PreconditionError("manifest entry " + std::to_string(i) + " does not match the corpus");
    done = prior.entries.size();
    finished = prior.finished_at.has_value();
  } else {
    JsonlAppender(manifest_path, opt.durable)
        .append(Json{{"type", "header"},
                     {"format", kManifestFormat},
                     {"config", to_json(config)},
                     {"template", digest},
                     {"started_at", iso8601_utc(opt.now_ms())}});
  }

  if (!finished) {
    JsonlAppender log(manifest_path, opt.durable);
    std::size_t todo = queries.size() - done;
    if (opt.stop_after) todo = std::min(todo, *opt.stop_after);

    auto attempt = [&](std::size_t qi) {
      const auto& q = *queries[qi];
      ManifestEntry e;
      e.index = qi;
      e.query_id = q.id;
      PromptBundle bundle;
      try {
        e.exemplar_ids = select_exemplars(q, config, ctx.corpus, ctx.index, ctx.embed);
        bundle = assemble_prompt(q, exemplar_views(ctx.corpus, e.exemplar_ids), ctx.tmpl, ctx.images);
        e.prompt_hash = bundle.hash();
      } catch (const Error& ex) {
        e.error = std::string("prompt: ") + ex.what();
        return e;
      }
      const auto request = to_chat_request(bundle, config.model_id);
      const auto t0 = opt.now_ms();
      for (int a = 0; a <= opt.retries; ++a) {
        if (a > 0) opt.sleep(opt.backoff_base * (1 << (a - 1)));
        ++e.attempts;
        try {
          auto reply = model.chat(request);
          if (is_blank(reply)) throw ProviderError("empty reply");
          e.reply = std::move(reply);
          e.error.reset();
          break;
        } catch (const Error& ex) {
          e.error = ex.what();
        }
      }
      e.latency_ms = opt.now_ms() - t0;
      return e;
    };

    // Workers fill slots; whoever completes the next index flushes the
    // contiguous ready prefix, so lines land in index order.
    std::vector<std::optional<ManifestEntry>> slots(todo);
    std::size_t next_write = 0;
    std::mutex mu;
    parallel_for_bounded(todo, opt.max_in_flight, [&](std::size_t i) {
      auto e = attempt(done + i);
      std::lock_guard lock(mu);
      slots[i] = std::move(e);
      while (next_write < todo && slots[next_write]) {
        log.append(to_json(*slots[next_write]));
        slots[next_write].reset();
        ++next_write;
      }
    });
    done += todo;
    if (done == queries.size()) {
      std::size_t failures = 0;
      for (const auto& e : load_manifest(manifest_path).entries) failures += e.error ? 1 : 0;
      log.append(Json{{"type", "footer"},
                      {"finished_at", iso8601_utc(opt.now_ms())},
                      {"entries", queries.size()},
                      {"failures", failures}});
    }
  }

  auto manifest = load_manifest(manifest_path);
  if (manifest.finished_at && !manifest.entries.empty()) {
    const double rate = static_cast<double>(manifest.failures()) / static_cast<double>(manifest.entries.size());
    if (rate > opt.max_failure_rate)
      throw RunAborted("failure rate " + std::to_string(rate) + " exceeds " + std::to_string(opt.max_failure_rate) +
                       " in " + manifest_path.string());
  }
  return manifest;
}

// Runs every config of the grid into <dir>/<stem>.jsonl.
inline std::vector<std::filesystem::path> run_grid(const ExperimentConfig& base, const RunContext& ctx,
                                                   ChatClient& model, const std::filesystem::path& dir,
                                                   const RunOptions& opt = {}) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& c : experiment_grid(base)) {
    auto path = dir / (manifest_stem(c) + ".jsonl");
    run_experiment(c, ctx, model, path, opt);
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace ricl
