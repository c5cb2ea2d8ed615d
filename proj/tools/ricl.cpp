// ricl: umbrella command-line tool.
//
//   ricl curate parse|dedupe|filter|pair|refine
//   ricl index build|query|sweep
//   ricl run
//   ricl eval judge|flask|specificity|stats|report
//   ricl tasks build
//   ricl serve
//
// Remote services are configured with flags or environment variables; see
// README.md. Exit status: 0 ok, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "ricl/annotation/server.hpp"
#include "ricl/annotation/store.hpp"
#include "ricl/annotation/tasks.hpp"
#include "ricl/core/corpus_io.hpp"
#include "ricl/core/fs.hpp"
#include "ricl/curation/pairing.hpp"
#include "ricl/curation/pipeline.hpp"
#include "ricl/curation/refine.hpp"
#include "ricl/embedding/gateway.hpp"
#include "ricl/embedding/precomputed.hpp"
#include "ricl/eval/judge_runs.hpp"
#include "ricl/eval/report.hpp"
#include "ricl/eval/scores.hpp"
#include "ricl/eval/stats.hpp"
#include "ricl/icl/runner.hpp"
#include "ricl/retrieval/index_io.hpp"
#include "ricl/retrieval/sweep.hpp"

using namespace ricl;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

Subset subset_arg(const std::string& s) {
  auto v = parse_subset(s);
  if (!v) throw PreconditionError("unknown subset '" + s + "' (vis or lang)");
  return *v;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

// ---- remote clients ----------------------------------------------------------

struct ChatOpts {
  std::string url;
  std::string token_env;
  long timeout_ms = 120000;

  std::unique_ptr<ChatClient> client(const char* what) const {
    if (url.empty()) throw PreconditionError(std::string("no ") + what + " endpoint (flag or environment)");
    return std::make_unique<HttpChatClient>(url, env_or(token_env.c_str()), std::chrono::milliseconds(timeout_ms));
  }
};

void add_chat_opts(CLI::App* cmd, ChatOpts& o, const std::string& prefix, const char* url_env,
                   const char* token_env) {
  o.url = env_or(url_env);
  o.token_env = token_env;
  cmd->add_option("--" + prefix + "-url", o.url, std::string("Chat endpoint (default $") + url_env + ")");
  cmd->add_option("--" + prefix + "-token-env", o.token_env, "Environment variable holding the bearer token")
      ->capture_default_str();
  cmd->add_option("--" + prefix + "-timeout-ms", o.timeout_ms, "Request timeout")->capture_default_str();
}

struct EmbedOpts {
  std::string embeddings;  // precomputed file, bypasses the providers
  std::string text_url;
  std::string image_url;
  std::size_t text_dim = 0;
  std::size_t image_dim = 0;
  std::string cache_dir;
  std::string image_root;
  int resolution = 512;
};

void add_embed_opts(CLI::App* cmd, EmbedOpts& o) {
  const auto env = ProviderConfig::from_env();
  o.text_url = env.text_endpoint;
  o.image_url = env.image_endpoint;
  o.text_dim = env.text_dim;
  o.image_dim = env.image_dim;
  o.resolution = env.image_resolution;
  o.cache_dir = env_or("RICL_EMBED_CACHE");
  cmd->add_option("--embeddings", o.embeddings, "Precomputed embeddings JSONL (id, image, text)");
  cmd->add_option("--text-embed-url", o.text_url, "Text embedding endpoint ($RICL_TEXT_EMBED_URL)");
  cmd->add_option("--image-embed-url", o.image_url, "Image embedding endpoint ($RICL_IMAGE_EMBED_URL)");
  cmd->add_option("--text-dim", o.text_dim, "Text embedding dimension ($RICL_TEXT_DIM)");
  cmd->add_option("--image-dim", o.image_dim, "Image embedding dimension ($RICL_IMAGE_DIM)");
  cmd->add_option("--cache-dir", o.cache_dir, "Embedding cache directory ($RICL_EMBED_CACHE)");
  cmd->add_option("--image-root", o.image_root, "Directory that relative image refs resolve against");
  cmd->add_option("--resolution", o.resolution, "Image side length sent to the provider")->capture_default_str();
}

// Either a precomputed table or a gateway over HTTP. Both give one
// RecordEmbeddings per record.
class Embedder {
 public:
  explicit Embedder(const EmbedOpts& o) {
    if (!o.embeddings.empty()) {
      table_ = std::make_shared<PrecomputedEmbeddings>(PrecomputedEmbeddings::load(o.embeddings));
      return;
    }
    ProviderConfig c = ProviderConfig::from_env();
    c.text_endpoint = o.text_url;
    c.image_endpoint = o.image_url;
    c.text_dim = o.text_dim;
    c.image_dim = o.image_dim;
    c.image_resolution = o.resolution;
    if (c.text_endpoint.empty() || c.image_endpoint.empty())
      throw PreconditionError("no embedding source: pass --embeddings or both embedding endpoints");
    gateway_ = std::make_shared<EmbeddingGateway>(
        EmbeddingGateway::over_http(c, std::make_shared<EmbeddingCache>(o.cache_dir), o.image_root));
  }

  // Fills the cache ahead of per-record calls; returns ids that failed.
  std::vector<std::string> warm(const std::vector<const ScenarioRecord*>& records) {
    if (!gateway_) return {};
    std::vector<ScenarioRecord> copy;
    for (const auto* r : records) copy.push_back(*r);
    return gateway_->warm_cache(copy).failed_ids;
  }

  RecordEmbeddings operator()(const ScenarioRecord& r) const {
    if (table_) return table_->at(r.id);
    return gateway_->embed_record(r);
  }

  QueryEmbedder as_query_embedder() const {
    auto self = *this;
    return [self](const ScenarioRecord& r) { return self(r); };
  }

 private:
  std::shared_ptr<PrecomputedEmbeddings> table_;
  std::shared_ptr<EmbeddingGateway> gateway_;
};

// ---- curate ------------------------------------------------------------------

std::vector<ScenarioBlock> read_blocks(const std::string& path) {
  const auto res = parse_scenario_blocks(read_file(path));
  for (const auto& d : res.errors) std::cerr << path << ":" << d.line << ":" << d.column << ": " << d.message << "\n";
  return res.blocks;
}

void print_report(const FilterReport& r) {
  Json j{{"input", r.input_count},
         {"removed_duplicates", r.removed_duplicates},
         {"removed_by_keyword", r.removed_by_keyword},
         {"output", r.output_count}};
  if (!r.keyword_counts.empty()) j["keyword_counts"] = r.keyword_counts;
  std::cerr << j.dump() << "\n";
}

void setup_curate(CLI::App& app, std::function<void()>& action) {
  auto* curate = app.add_subcommand("curate", "Scenario curation")->require_subcommand(1);

  {
    auto* cmd = curate->add_subcommand("parse", "Parse raw generation output into scenario blocks");
    static std::string input, out;
    static bool strict = false;
    cmd->add_option("input", input, "Raw LLM output")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Output block file (default stdout)");
    cmd->add_flag("--strict", strict, "Fail on any syntax error");
    cmd->callback([&] {
      action = [] {
        const auto res = parse_scenario_blocks(read_file(input));
        for (const auto& d : res.errors)
          std::cerr << input << ":" << d.line << ":" << d.column << ": " << d.message << "\n";
        if (strict && !res.errors.empty()) throw PreconditionError(std::to_string(res.errors.size()) + " parse errors");
        emit(serialize_blocks(res.blocks), out);
        std::cerr << res.blocks.size() << " blocks, " << res.errors.size() << " errors\n";
      };
    });
  }
  {
    auto* cmd = curate->add_subcommand("dedupe", "Drop near-duplicate captions");
    static std::string input, out;
    static double threshold = 0.8;
    cmd->add_option("input", input, "Block file")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Output block file (default stdout)");
    cmd->add_option("--threshold", threshold, "Trigram Jaccard at or above which captions are duplicates")
        ->capture_default_str();
    cmd->callback([&] {
      action = [] {
        auto [kept, report] = dedupe(read_blocks(input), threshold);
        emit(serialize_blocks(kept), out);
        print_report(report);
      };
    });
  }
  {
    auto* cmd = curate->add_subcommand("filter", "Cap how many scenarios mention each keyword");
    static std::string input, out, keywords;
    static long cap = 20;
    cmd->add_option("input", input, "Block file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--keywords", keywords, "Keyword list, one per line")->required()->check(CLI::ExistingFile);
    cmd->add_option("--cap", cap, "Per-keyword cap")->capture_default_str();
    cmd->add_option("-o,--out", out, "Output block file (default stdout)");
    cmd->callback([&] {
      action = [] {
        auto [kept, report] = keyword_diversity_filter(read_blocks(input), load_keywords(keywords), cap);
        emit(serialize_blocks(kept), out);
        print_report(report);
      };
    });
  }
  {
    auto* cmd = curate->add_subcommand("pair", "Search candidate images, record reviewer picks, export records");
    static std::string blocks, store, search_url, token_env = "RICL_SEARCH_TOKEN", select_id, url, reviewer,
                                                  export_path, subset = "vis", split = "db";
    static std::size_t candidate = 0;
    static bool do_export = false;
    search_url = env_or("RICL_SEARCH_URL");
    cmd->add_option("--blocks", blocks, "Block file")->check(CLI::ExistingFile);
    cmd->add_option("--store", store, "Pairing log (JSONL)")->required();
    cmd->add_option("--search-url", search_url, "Image search endpoint ($RICL_SEARCH_URL)");
    cmd->add_option("--search-token-env", token_env)->capture_default_str();
    cmd->add_option("--subset", subset)->capture_default_str();
    auto* sel = cmd->add_option("--select", select_id, "Scenario id to resolve");
    cmd->add_option("--candidate", candidate, "Index of the chosen candidate")->needs(sel);
    cmd->add_option("--url", url, "External image URL instead of a candidate")->needs(sel);
    cmd->add_option("--reviewer", reviewer, "Reviewer name")->needs(sel);
    cmd->add_flag("--export", do_export, "Write records for selected pairings");
    cmd->add_option("-o,--out", export_path, "Corpus output for --export");
    cmd->add_option("--split", split, "Split for exported records")->capture_default_str();
    cmd->callback([&] {
      action = [] {
        const auto sub = subset_arg(subset);
        PairingStore log(store);
        if (!select_id.empty()) {
          const auto latest = log.latest();
          auto it = latest.find(select_id);
          if (it == latest.end()) throw PreconditionError("no pairing for '" + select_id + "'");
          if (reviewer.empty()) throw PreconditionError("--reviewer is required with --select");
          auto p = url.empty() ? select_candidate(it->second, candidate, reviewer)
                               : select_external(it->second, url, reviewer);
          log.record(p);
          std::cout << to_json(p).dump() << "\n";
          return;
        }
        if (blocks.empty()) throw PreconditionError("--blocks is required");
        const auto bs = read_blocks(blocks);
        if (do_export) {
          auto sp = parse_split(split);
          if (!sp) throw PreconditionError("unknown split '" + split + "'");
          const auto latest = log.latest();
          std::vector<ScenarioRecord> records;
          std::size_t missing = 0;
          for (const auto& b : bs) {
            auto it = latest.find(mint_scenario_id(sub, b));
            if (it == latest.end() || !it->second.selected_image()) {
              ++missing;
              continue;
            }
            records.push_back(to_record(b, sub, *it->second.selected_image(), *sp));
          }
          const Corpus corpus(std::move(records), {});
          if (export_path.empty()) std::cout << serialize_corpus(corpus);
          else save_corpus(corpus, export_path);
          std::cerr << corpus.size() << " records exported, " << missing << " without a selected image\n";
          return;
        }
        if (search_url.empty()) throw PreconditionError("no search endpoint");
        HttpSearchClient client(search_url, env_or(token_env.c_str()), std::chrono::milliseconds(30000));
        const auto latest = log.latest();
        std::size_t searched = 0, failed = 0;
        for (const auto& b : bs) {
          const auto id = mint_scenario_id(sub, b);
          if (auto it = latest.find(id); it != latest.end() && it->second.status != PairingStatus::pending) continue;
          const auto p = pair_images(id, b.caption, client, &log);
          ++searched;
          failed += p.status == PairingStatus::pending;
        }
        std::cerr << searched << " searched, " << failed << " failed\n";
      };
    });
  }
  {
    auto* cmd = curate->add_subcommand("refine", "Refine human explanations of test records with an LLM");
    static std::string corpus_path, out, model;
    static ChatOpts chat;
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Output corpus (default: overwrite input)");
    cmd->add_option("--model", model, "Model id sent with each request")->required();
    add_chat_opts(cmd, chat, "llm", "RICL_MODEL_URL", "RICL_MODEL_TOKEN");
    cmd->callback([&] {
      action = [] {
        const auto corpus = load_corpus(corpus_path);
        auto client = chat.client("LLM");
        auto exps = corpus.explanations();
        std::size_t added = 0;
        for (const auto& r : corpus.records()) {
          const Explanation* human = nullptr;
          bool has_refined = false;
          for (const auto* e : corpus.explanations_for(r.id)) {
            if (e->source == ExplanationSource::human && !human) human = e;
            has_refined |= e->source == ExplanationSource::human_llm;
          }
          if (!human || has_refined) continue;
          exps.push_back(refine_explanation(r.id, r.caption, r.outcome, human->text, *client, model));
          ++added;
        }
        save_corpus(Corpus(corpus.records(), std::move(exps)), out.empty() ? corpus_path : out);
        std::cerr << added << " explanations refined\n";
      };
    });
  }
}

// ---- index -------------------------------------------------------------------

void setup_index(CLI::App& app, std::function<void()>& action) {
  auto* index = app.add_subcommand("index", "Multimodal example retriever")->require_subcommand(1);
  {
    auto* cmd = index->add_subcommand("build", "Index the db split of one subset");
    static std::string corpus_path, out, subset = "vis";
    static EmbedOpts eo;
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--subset", subset)->capture_default_str();
    cmd->add_option("-o,--out", out, "Index file")->required();
    add_embed_opts(cmd, eo);
    cmd->callback([&] {
      action = [] {
        const auto corpus = load_corpus(corpus_path);
        const auto records = corpus.select(subset_arg(subset), Split::db);
        Embedder embed(eo);
        const auto failed = embed.warm(records);
        const std::set<std::string> skip(failed.begin(), failed.end());
        std::vector<IndexedEntry> entries;
        for (const auto* r : records) {
          if (skip.contains(r->id)) continue;
          auto e = embed(*r);
          entries.push_back({r->id, std::move(e.image), std::move(e.text)});
        }
        const auto idx = build_index(entries);
        save_index(idx, out);
        std::cout << Json{{"entries", idx.size()},
                          {"image_dim", idx.image_dim()},
                          {"text_dim", idx.text_dim()},
                          {"skipped", failed}}
                         .dump()
                  << "\n";
      };
    });
  }
  {
    auto* cmd = index->add_subcommand("query", "Retrieve the nearest db records for a corpus record");
    static std::string corpus_path, index_path, id;
    static std::size_t k = 5;
    static double alpha = 0.4;
    static EmbedOpts eo;
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--index", index_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--id", id, "Query record id")->required();
    cmd->add_option("--k", k)->capture_default_str();
    cmd->add_option("--alpha", alpha, "Image weight in the fused score")->capture_default_str();
    add_embed_opts(cmd, eo);
    cmd->callback([&] {
      action = [] {
        const auto corpus = load_corpus(corpus_path);
        const auto idx = load_index(index_path);
        const auto e = Embedder(eo)(corpus.at(id));
        Json out = Json::array();
        for (const auto& h : idx.retrieve({e.image, e.text, k, alpha}))
          out.push_back({{"rank", h.rank},
                         {"id", h.scenario_id},
                         {"fused", h.fused_score},
                         {"image", h.image_score},
                         {"text", h.text_score}});
        std::cout << out.dump(2) << "\n";
      };
    });
  }
  {
    auto* cmd = index->add_subcommand("sweep", "Score retrieval over a grid of alpha values");
    static std::string corpus_path, index_path, alphas = "0.3:0.7:0.1", metric = "category", out;
    static std::size_t k = 5, sample = 0;
    static std::uint64_t seed = 0;
    static std::string subset = "vis";
    static EmbedOpts eo;
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--index", index_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--subset", subset)->capture_default_str();
    cmd->add_option("--alphas", alphas, "lo:hi:step or a comma list")->capture_default_str();
    cmd->add_option("--k", k)->capture_default_str();
    cmd->add_option("--sample", sample, "Number of test queries to draw (0 = all)")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed for query sampling")->capture_default_str();
    cmd->add_option("--metric", metric, "category (shared-category precision at k) or score (mean fused score)")
        ->check(CLI::IsMember({"category", "score"}))
        ->capture_default_str();
    cmd->add_option("-o,--out", out, "CSV output (default stdout)");
    add_embed_opts(cmd, eo);
    cmd->callback([&] {
      action = [] {
        std::vector<double> grid;
        if (alphas.find(':') != std::string::npos) {
          double lo = 0, hi = 0, step = 0;
          if (std::sscanf(alphas.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
            throw PreconditionError("bad --alphas '" + alphas + "'");
          grid = alpha_grid(lo, hi, step);
        } else {
          std::stringstream ss(alphas);
          for (std::string tok; std::getline(ss, tok, ',');) grid.push_back(std::stod(tok));
        }
        const auto corpus = load_corpus(corpus_path);
        const auto idx = load_index(index_path);
        auto pool = corpus.select(subset_arg(subset), Split::test);
        if (sample > 0 && sample < pool.size()) {
          std::vector<const ScenarioRecord*> picked;
          Rng rng(RngSeed{seed});
          for (auto i : rng.sample_indices(pool.size(), sample)) picked.push_back(pool[i]);
          pool = std::move(picked);
        }
        if (pool.empty()) throw PreconditionError("no test queries for subset " + subset);
        Embedder embed(eo);
        std::vector<RetrievalQuery> queries;
        for (const auto* r : pool) {
          auto e = embed(*r);
          queries.push_back({std::move(e.image), std::move(e.text), k, 0.4});
        }
        auto category_precision = [&](double, std::span<const std::vector<RetrievalHit>> hits) {
          double total = 0;
          std::size_t counted = 0;
          for (std::size_t q = 0; q < hits.size(); ++q) {
            const auto& cats = pool[q]->categories;
            if (cats.empty()) continue;
            std::size_t shared = 0;
            for (const auto& h : hits[q]) {
              const auto& hc = corpus.at(h.scenario_id).categories;
              shared += std::any_of(hc.begin(), hc.end(), [&](const std::string& c) {
                return std::find(cats.begin(), cats.end(), c) != cats.end();
              });
            }
            total += static_cast<double>(shared) / static_cast<double>(hits[q].size());
            ++counted;
          }
          if (counted == 0) throw PreconditionError("no query has categories; use --metric score");
          return total / static_cast<double>(counted);
        };
        auto mean_score = [](double, std::span<const std::vector<RetrievalHit>> hits) {
          double total = 0;
          std::size_t n = 0;
          for (const auto& hs : hits)
            for (const auto& h : hs) total += h.fused_score, ++n;
          return n ? total / static_cast<double>(n) : 0.0;
        };
        const auto rows = metric == "category" ? alpha_sweep(idx, queries, grid, category_precision)
                                               : alpha_sweep(idx, queries, grid, mean_score);
        std::string csv = "alpha," + metric + ",queries\n";
        char buf[96];
        for (const auto& r : rows) {
          std::snprintf(buf, sizeof buf, "%.2f,%.6f,%zu\n", r.alpha, r.metric, r.queries);
          csv += buf;
        }
        emit(csv, out);
      };
    });
  }
}

// ---- run ---------------------------------------------------------------------

void setup_run(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("run", "Run an in-context learning experiment and write its manifest");
  static std::string corpus_path, index_path, model, mode = "retrieved", subset = "vis", out, out_dir, template_path,
                                                     image_root;
  static int shots = 5, resolution = 512, retries = 3;
  static double alpha = 0.4, max_failure_rate = 0.2;
  static std::size_t k_pool = 20, max_in_flight = 4;
  static std::uint64_t seed = 0;
  static bool grid = false;
  static ChatOpts chat;
  static EmbedOpts eo;
  cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  cmd->add_option("--index", index_path, "Index over the db split (retrieved mode)")->check(CLI::ExistingFile);
  cmd->add_option("--model", model, "Model id")->required();
  cmd->add_option("--shots", shots, "0, 1, 3 or 5")->capture_default_str();
  cmd->add_option("--mode", mode, "none, random or retrieved")
      ->check(CLI::IsMember({"none", "random", "retrieved"}))
      ->capture_default_str();
  cmd->add_option("--alpha", alpha, "Image weight in the fused score")->capture_default_str();
  cmd->add_option("--k-pool", k_pool, "Retrieved candidates before eligibility filtering")->capture_default_str();
  cmd->add_option("--seed", seed)->capture_default_str();
  cmd->add_option("--subset", subset)->capture_default_str();
  cmd->add_option("-o,--out", out, "Manifest path (single experiment)");
  cmd->add_flag("--grid", grid, "Run the full 0/1/3/5-shot grid for the model");
  cmd->add_option("--out-dir", out_dir, "Manifest directory for --grid");
  cmd->add_option("--template", template_path, "Prompt template file (default: built-in)")->check(CLI::ExistingFile);
  cmd->add_option("--prompt-image-root", image_root, "Directory for local images embedded in prompts");
  cmd->add_option("--prompt-resolution", resolution, "Side length of images embedded in prompts")
      ->capture_default_str();
  cmd->add_option("--max-in-flight", max_in_flight)->capture_default_str();
  cmd->add_option("--retries", retries)->capture_default_str();
  cmd->add_option("--max-failure-rate", max_failure_rate)->capture_default_str();
  add_chat_opts(cmd, chat, "model", "RICL_MODEL_URL", "RICL_MODEL_TOKEN");
  add_embed_opts(cmd, eo);
  cmd->callback([&] {
    action = [] {
      const auto corpus = load_corpus(corpus_path);
      ExperimentConfig c;
      c.model_id = model;
      c.shots = shots;
      c.mode = *parse_mode(mode);
      c.alpha = alpha;
      c.k_pool = k_pool;
      c.seed = RngSeed{seed};
      c.subset = subset_arg(subset);
      std::optional<MerIndex> idx;
      if (!index_path.empty()) idx = load_index(index_path);
      const bool needs_index = grid || c.mode == ExemplarMode::retrieved;
      if (needs_index && !idx) throw PreconditionError("--index is required for retrieved exemplars");
      QueryEmbedder embed;
      if (needs_index) embed = Embedder(eo).as_query_embedder();
      FileImageResolver resolver(image_root, resolution);
      RunContext ctx{corpus, idx ? &*idx : nullptr, embed,
                     template_path.empty() ? IclTemplate::builtin() : IclTemplate::load(template_path),
                     [&resolver](const std::string& ref) { return resolver(ref); }};
      RunOptions opt;
      opt.max_in_flight = max_in_flight;
      opt.retries = retries;
      opt.max_failure_rate = max_failure_rate;
      auto client = chat.client("model");
      if (grid) {
        if (out_dir.empty()) throw PreconditionError("--out-dir is required with --grid");
        for (const auto& p : run_grid(c, ctx, *client, out_dir, opt)) std::cout << p.string() << "\n";
        return;
      }
      if (out.empty()) out = manifest_stem(c) + ".jsonl";
      const auto m = run_experiment(c, ctx, *client, out, opt);
      std::cout << Json{{"manifest", out}, {"entries", m.entries.size()}, {"failures", m.failures()}}.dump() << "\n";
    };
  });
}

// ---- eval --------------------------------------------------------------------

std::string condition_label(const RunManifest& m) { return manifest_stem(m.config); }

void setup_eval(CLI::App& app, std::function<void()>& action) {
  auto* eval = app.add_subcommand("eval", "Judging, scoring and corpus statistics")->require_subcommand(1);
  {
    auto* cmd = eval->add_subcommand("judge", "Pairwise-judge manifests against the reference explanations");
    static std::vector<std::string> manifests;
    static std::string corpus_path, out, judge_model, template_path;
    static std::uint64_t seed = 0;
    static std::size_t max_in_flight = 4;
    static ChatOpts chat;
    cmd->add_option("manifests", manifests)->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Judgment log (appended)")->required();
    cmd->add_option("--judge-model", judge_model, "Judge model id");
    cmd->add_option("--seed", seed, "Seed for presentation order")->capture_default_str();
    cmd->add_option("--template", template_path)->check(CLI::ExistingFile);
    cmd->add_option("--max-in-flight", max_in_flight)->capture_default_str();
    add_chat_opts(cmd, chat, "judge", "RICL_JUDGE_URL", "RICL_JUDGE_TOKEN");
    cmd->callback([&] {
      action = [] {
        const auto corpus = load_corpus(corpus_path);
        const auto tmpl = template_path.empty() ? IclTemplate::builtin() : IclTemplate::load(template_path);
        auto client = chat.client("judge");
        JudgeRunOptions opt{RngSeed{seed}, max_in_flight, 3, judge_model};
        for (const auto& path : manifests) {
          const auto m = load_manifest(path);
          const auto js = judge_manifest(m, corpus, tmpl, *client, opt, fs::path(out));
          Json line{{"manifest", path}, {"condition", condition_label(m)}, {"judgments", js.size()}};
          try {
            const auto wr = win_rate(js, condition_label(m));
            line["win_rate"] = wr.rate;
            line["invalid"] = wr.invalid;
          } catch (const PreconditionError&) {
            line["win_rate"] = nullptr;
          }
          std::cout << line.dump() << "\n";
        }
      };
    });
  }
  {
    auto* cmd = eval->add_subcommand("flask", "Skill scores (LR, LC, LE, CS) per explanation");
    static std::vector<std::string> manifests;
    static std::string corpus_path, out, judge_model, rubric_path, table_from;
    static int shots = 5;
    static ChatOpts chat;
    cmd->add_option("manifests", manifests)->check(CLI::ExistingFile);
    cmd->add_option("--corpus", corpus_path)->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Score log (JSONL, appended)");
    cmd->add_option("--judge-model", judge_model);
    cmd->add_option("--rubric", rubric_path, "Rubric prompt file (default: built-in)")->check(CLI::ExistingFile);
    cmd->add_option("--table", table_from, "Render the table from an existing score log")->check(CLI::ExistingFile);
    cmd->add_option("--shots", shots, "Shot count compared in the table")->capture_default_str();
    add_chat_opts(cmd, chat, "judge", "RICL_JUDGE_URL", "RICL_JUDGE_TOKEN");
    cmd->callback([&] {
      action = [] {
        std::map<std::string, std::vector<SkillScores>> by_label;
        auto scores_json = [](const SkillScores& s) {
          return Json{{"LR", s.lr}, {"LC", s.lc}, {"LE", s.le}, {"CS", s.cs}};
        };
        if (!table_from.empty()) {
          for_each_jsonl(table_from, [&](const Json& j, std::size_t) {
            const auto& s = j.at("scores");
            by_label[j.at("condition").get<std::string>()].push_back(
                {s.at("LR").get<int>(), s.at("LC").get<int>(), s.at("LE").get<int>(), s.at("CS").get<int>()});
          });
        } else {
          if (manifests.empty() || corpus_path.empty())
            throw PreconditionError("pass manifests and --corpus, or --table");
          const auto corpus = load_corpus(corpus_path);
          const auto rubric = rubric_path.empty() ? std::string(prompts::kFlaskRubricPrompt) : read_file(rubric_path);
          auto client = chat.client("judge");
          std::optional<JsonlAppender> log;
          if (!out.empty()) log.emplace(out, true);
          for (const auto& path : manifests) {
            const auto m = load_manifest(path);
            const auto label = condition_label(m);
            for (const auto& e : m.entries) {
              if (!e.reply || is_blank(*e.reply)) continue;
              const auto& q = corpus.at(e.query_id);
              try {
                const auto s = flask_score(q.caption, q.outcome, *e.reply, *client, rubric, 3, judge_model);
                by_label[label].push_back(s);
                if (log) log->append(Json{{"condition", label}, {"query_id", q.id}, {"scores", scores_json(s)}});
              } catch (const ReplyParseError& ex) {
                std::cerr << label << " " << q.id << ": " << ex.what() << "\n";
              }
            }
          }
        }
        std::map<std::string, FlaskRow> rows;
        for (const auto& [label, scores] : by_label) {
          const auto c = parse_condition(label);
          if (!c || c->shots != shots || scores.empty()) continue;
          auto& row = rows[c->model];
          row.model = c->model;
          (c->mode == ExemplarMode::random ? row.random : row.retrieved) = mean_skills(scores);
        }
        std::vector<FlaskRow> table;
        for (auto& [model, row] : rows)
          if (row.random.count && row.retrieved.count) table.push_back(row);
        if (table.empty()) {
          std::cerr << "no model has both random and retrieved scores at " << shots << " shots\n";
          for (const auto& [label, scores] : by_label) {
            const auto m = mean_skills(scores);
            std::printf("%s  LR %.2f  LC %.2f  LE %.2f  CS %.2f  (n=%zu)\n", label.c_str(), m.mean[0], m.mean[1],
                        m.mean[2], m.mean[3], m.count);
          }
          return;
        }
        std::cout << render_flask_table(table);
      };
    });
  }
  {
    auto* cmd = eval->add_subcommand("specificity", "Specificity distribution of explanations");
    static std::vector<std::string> manifests;
    static std::string corpus_path, source, subset = "vis", judge_model;
    static ChatOpts chat;
    cmd->add_option("manifests", manifests)->check(CLI::ExistingFile);
    cmd->add_option("--corpus", corpus_path, "Corpus (with --source)")->check(CLI::ExistingFile);
    cmd->add_option("--source", source, "Corpus explanation source to score: human, llm or human_llm");
    cmd->add_option("--subset", subset)->capture_default_str();
    cmd->add_option("--judge-model", judge_model);
    add_chat_opts(cmd, chat, "judge", "RICL_JUDGE_URL", "RICL_JUDGE_TOKEN");
    cmd->callback([&] {
      action = [] {
        std::map<std::string, std::vector<std::string>> groups;
        for (const auto& path : manifests) {
          const auto m = load_manifest(path);
          auto& texts = groups[condition_label(m)];
          for (const auto& e : m.entries)
            if (e.reply && !is_blank(*e.reply)) texts.push_back(*e.reply);
        }
        if (!source.empty()) {
          if (corpus_path.empty()) throw PreconditionError("--source needs --corpus");
          auto src = parse_source(source);
          if (!src) throw PreconditionError("unknown source '" + source + "'");
          const auto corpus = load_corpus(corpus_path);
          auto& texts = groups[source];
          for (const auto* r : corpus.select(subset_arg(subset), std::nullopt))
            for (const auto* e : corpus.explanations_for(r->id))
              if (e->source == *src) texts.push_back(e->text);
        }
        if (groups.empty()) throw PreconditionError("nothing to score");
        auto client = chat.client("judge");
        std::printf("%-32s %6s %6s %6s %6s %6s %6s %5s\n", "group", "1", "2", "3", "4", "5", "mean", "n");
        for (const auto& [name, texts] : groups) {
          SpecificityDistribution d;
          for (const auto& t : texts) {
            try {
              d.add(specificity_score(t, *client, 3, judge_model));
            } catch (const ReplyParseError& ex) {
              std::cerr << name << ": " << ex.what() << "\n";
            }
          }
          if (d.total == 0) continue;
          std::printf("%-32s %6.3f %6.3f %6.3f %6.3f %6.3f %6.2f %5zu\n", name.c_str(), d.proportion(1),
                      d.proportion(2), d.proportion(3), d.proportion(4), d.proportion(5), d.mean(), d.total);
        }
      };
    });
  }
  {
    auto* cmd = eval->add_subcommand("stats", "Token length and n-gram entropy per explanation group");
    static std::vector<std::string> manifests, sources{"human", "llm", "human_llm"};
    static std::string corpus_path, subset = "vis", hist_csv, entropy_csv, json_out;
    static std::size_t iterations = 100;
    static std::uint64_t seed = 0;
    cmd->add_option("manifests", manifests, "Run manifests, one group each")->check(CLI::ExistingFile);
    cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--sources", sources, "Corpus explanation sources, one group each")->delimiter(',');
    cmd->add_option("--subset", subset)->capture_default_str();
    cmd->add_option("--iterations", iterations, "Bootstrap iterations")->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--hist-csv", hist_csv, "Length histogram series");
    cmd->add_option("--entropy-csv", entropy_csv, "Entropy-vs-n series");
    cmd->add_option("--json", json_out, "Machine-readable summary");
    cmd->callback([&] {
      action = [] {
        const auto corpus = load_corpus(corpus_path);
        const auto sub = subset_arg(subset);
        std::vector<std::pair<std::string, std::map<std::string, std::vector<std::string>>>> groups;
        for (const auto& s : sources) {
          auto src = parse_source(s);
          if (!src) throw PreconditionError("unknown source '" + s + "'");
          std::map<std::string, std::vector<std::string>> pairs;
          for (const auto* r : corpus.select(sub, std::nullopt))
            for (const auto* e : corpus.explanations_for(r->id))
              if (e->source == *src) pairs[r->id].push_back(e->text);
          if (!pairs.empty()) groups.emplace_back(s, std::move(pairs));
        }
        for (const auto& path : manifests) {
          const auto m = load_manifest(path);
          std::map<std::string, std::vector<std::string>> pairs;
          for (const auto& e : m.entries)
            if (e.reply && !is_blank(*e.reply)) pairs[e.query_id].push_back(*e.reply);
          if (!pairs.empty()) groups.emplace_back(condition_label(m), std::move(pairs));
        }
        if (groups.empty()) throw PreconditionError("no explanations found");
        std::vector<CorpusStats> stats;
        for (const auto& [name, pairs] : groups) stats.push_back(corpus_stats(name, pairs, iterations, RngSeed{seed}));
        std::printf("%-32s %16s", "group", "tokens");
        for (std::size_t n = 1; n <= kMaxEntropyOrder; ++n) std::printf("  %-15s", ("H" + std::to_string(n)).c_str());
        std::printf("\n");
        Json summary = Json::array();
        for (const auto& s : stats) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.2f ± %.2f", s.mean_tokens, s.std_tokens);
          std::printf("%-32s %16s", s.group.c_str(), buf);
          Json ent = Json::object();
          for (const auto& [n, ms] : s.entropy) {
            std::snprintf(buf, sizeof buf, "%.2f ± %.2f", ms.mean, ms.std);
            std::printf("  %-15s", buf);
            ent[std::to_string(n)] = {{"mean", ms.mean}, {"std", ms.std}};
          }
          std::printf("\n");
          summary.push_back({{"group", s.group},
                             {"explanations", s.sample_count},
                             {"tokens", {{"mean", s.mean_tokens}, {"std", s.std_tokens}}},
                             {"entropy", ent}});
        }
        if (!hist_csv.empty()) write_file_atomic(hist_csv, length_histogram_csv(stats));
        if (!entropy_csv.empty()) write_file_atomic(entropy_csv, entropy_curve_csv(stats));
        if (!json_out.empty()) write_file_atomic(json_out, summary.dump(2) + "\n");
      };
    });
  }
  {
    auto* cmd = eval->add_subcommand("report", "Win-rate table from judgment logs");
    static std::vector<std::string> logs;
    static std::string reference{kReferenceSource}, json_out, csv_out;
    cmd->add_option("judgments", logs, "Judgment logs")->required()->check(CLI::ExistingFile);
    cmd->add_option("--reference", reference, "Reference source label")->capture_default_str();
    cmd->add_option("--json", json_out, "Structured report");
    cmd->add_option("--csv", csv_out, "Per-cell CSV");
    cmd->callback([&] {
      action = [] {
        std::vector<PairwiseJudgment> all;
        for (const auto& p : logs) {
          auto js = load_judgments(p);
          all.insert(all.end(), js.begin(), js.end());
        }
        const auto report = build_report(condition_win_rates(all, reference));
        std::cout << render_report_text(report);
        if (!json_out.empty()) write_file_atomic(json_out, to_json(report).dump(2) + "\n");
        if (!csv_out.empty()) write_file_atomic(csv_out, report_cells_csv(report));
      };
    });
  }
}

// ---- tasks / serve -----------------------------------------------------------

// "corpus:<source>" or a manifest path.
TaskSide side_arg(const std::string& spec, const Corpus& corpus, Subset subset) {
  constexpr std::string_view prefix = "corpus:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto name = spec.substr(prefix.size());
    auto src = parse_source(name);
    if (!src) throw PreconditionError("unknown source '" + name + "'");
    return side_from_corpus(corpus, subset, *src);
  }
  return side_from_manifest(load_manifest(spec));
}

void setup_tasks(CLI::App& app, std::function<void()>& action) {
  auto* tasks = app.add_subcommand("tasks", "Human evaluation tasks")->require_subcommand(1);
  auto* cmd = tasks->add_subcommand("build", "Sample blinded A/B tasks comparing two explanation sources");
  static std::string first, second, corpus_path, subset = "vis", out;
  static std::size_t sample = 50;
  static std::uint64_t seed = 0;
  cmd->add_option("--first", first, "Manifest path or corpus:<source>")->required();
  cmd->add_option("--second", second, "Manifest path or corpus:<source>")->default_val("corpus:human_llm");
  cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  cmd->add_option("--subset", subset, "Subset for corpus:<source> sides")->capture_default_str();
  cmd->add_option("--sample", sample, "Tasks to draw")->capture_default_str();
  cmd->add_option("--seed", seed)->capture_default_str();
  cmd->add_option("-o,--out", out, "Tasks file")->required();
  cmd->callback([&] {
    action = [] {
      const auto corpus = load_corpus(corpus_path);
      const auto sub = subset_arg(subset);
      const auto ts = build_tasks(side_arg(first, corpus, sub), side_arg(second, corpus, sub), corpus, sample,
                                  RngSeed{seed});
      save_tasks(out, ts);
      std::cout << Json{{"tasks", ts.size()}, {"out", out}}.dump() << "\n";
    };
  });
}

AnnotationServer* g_server = nullptr;

void setup_serve(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("serve", "Serve annotation tasks over HTTP");
  static std::string host = "127.0.0.1", tasks_file, tokens, data_dir = "annotation-data", image_root, static_dir;
  static int port = 8080;
  static std::optional<std::uint64_t> seed;
  static std::size_t per_task = 1;
  cmd->add_option("--port", port)->capture_default_str();
  cmd->add_option("--host", host)->capture_default_str();
  cmd->add_option("--tasks-file", tasks_file)->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", seed, "Shuffle the order tasks are handed out");
  cmd->add_option("--tokens", tokens, "Annotator token file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data-dir", data_dir, "Judgment log and snapshot directory")->capture_default_str();
  cmd->add_option("--image-root", image_root, "Directory for local task images");
  cmd->add_option("--static-dir", static_dir, "UI bundle served at /");
  cmd->add_option("--judgments-per-task", per_task)->capture_default_str();
  cmd->callback([&] {
    action = [] {
      auto ts = load_tasks(tasks_file);
      if (seed) {
        Rng rng(derive(RngSeed{*seed}, "serve-order"));
        std::vector<AnnotationTask> shuffled;
        for (auto i : rng.sample_indices(ts.size(), ts.size())) shuffled.push_back(ts[i]);
        ts = std::move(shuffled);
      }
      AnnotationStore store(std::move(ts), data_dir, per_task);
      AnnotationServer server(store, AnnotatorTokens::load(tokens), {image_root, static_dir});
      g_server = &server;
      std::signal(SIGINT, [](int) { g_server->stop(); });
      std::signal(SIGTERM, [](int) { g_server->stop(); });
      if (!server.bind(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "serving " << store.tasks().size() << " tasks on http://" << host << ":" << port << "\n";
      server.listen_after_bind();
      store.write_snapshot();
      g_server = nullptr;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-based in-context learning toolkit"};
  app.require_subcommand(1);
  std::function<void()> action;
  setup_curate(app, action);
  setup_index(app, action);
  setup_run(app, action);
  setup_eval(app, action);
  setup_tasks(app, action);
  setup_serve(app, action);
  CLI11_PARSE(app, argc, argv);
  try {
    if (action) action();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
