#pragma once

// HTTP API (docs/api.md):
//
//   GET  /api/health                 no auth
//   GET  /api/tasks/next             -> {"task": <payload>|null, "progress": {...}}
//   POST /api/judgments              {"task_id": "...", "choice": "a"|"b"}
//   GET  /api/results                -> win rates per source pair
//   GET  /api/images/<task_id>       image bytes of the task's query
//   GET  /*                          static UI bundle, when configured
//
// Authenticated routes take "Authorization: Bearer <token>"; the images
// route also accepts ?token=<token> for <img> tags.

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ricl/annotation/store.hpp"
#include "ricl/core/fs.hpp"
#include "ricl/core/http.hpp"
#include "ricl/embedding/image_prep.hpp"

namespace ricl {

// Token file: {"tokens": {"<token>": "<annotator id>", ...}}
struct AnnotatorTokens {
  std::map<std::string, std::string> by_token;

  static AnnotatorTokens load(const std::filesystem::path& path) {
    AnnotatorTokens t;
    try {
      const auto j = Json::parse(read_file(path));
      for (const auto& [token, who] : j.at("tokens").items()) {
        if (token.empty() || !who.is_string() || who.get<std::string>().empty())
          throw PreconditionError("empty token or annotator id in " + path.string());
        t.by_token[token] = who.get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw PreconditionError("token file " + path.string() + ": " + e.what());
    }
    return t;
  }

  std::optional<std::string> annotator(const std::string& token) const {
    auto it = by_token.find(token);
    if (it == by_token.end()) return std::nullopt;
    return it->second;
  }
};

struct ServerOptions {
  std::filesystem::path image_root;
  std::optional<std::filesystem::path> static_dir;
};

class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, AnnotatorTokens tokens, ServerOptions opt = {})
      : store_(store), tokens_(std::move(tokens)), opt_(std::move(opt)) {
    routes();
  }

  httplib::Server& http() { return srv_; }

  int bind_any(const std::string& host = "127.0.0.1") { return srv_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return srv_.bind_to_port(host, port); }
  bool listen_after_bind() { return srv_.listen_after_bind(); }
  void stop() { srv_.stop(); }
  void wait_until_ready() { srv_.wait_until_ready(); }

 private:
  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }
  static void send_error(httplib::Response& res, int status, const std::string& msg) {
    send_json(res, status, Json{{"error", msg}});
  }

  std::optional<std::string> authenticate(const httplib::Request& req, bool allow_query) const {
    std::string token;
    const auto auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) == 0) token = auth.substr(7);
    else if (allow_query && req.has_param("token")) token = req.get_param_value("token");
    if (token.empty()) return std::nullopt;
    return tokens_.annotator(token);
  }

  Json progress(const std::string& who) const {
    return Json{{"completed", store_.completed(who)},
                {"open", store_.open_tasks()},
                {"total", store_.tasks().size()}};
  }

  void routes() {
    srv_.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200,
                Json{{"status", "ok"}, {"tasks", store_.tasks().size()}, {"open", store_.open_tasks()},
                     {"done", store_.done_tasks()}});
    });

    srv_.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      const auto who = authenticate(req, false);
      if (!who) return send_error(res, 401, "missing or unknown bearer token");
      const auto task = store_.next_task(*who);
      send_json(res, 200, Json{{"task", task ? ui_payload(*task) : Json(nullptr)}, {"progress", progress(*who)}});
    });

    srv_.Post("/api/judgments", [this](const httplib::Request& req, httplib::Response& res) {
      const auto who = authenticate(req, false);
      if (!who) return send_error(res, 401, "missing or unknown bearer token");
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const nlohmann::json::exception&) {
        return send_error(res, 400, "body is not JSON");
      }
      if (!body.is_object() || !body.contains("task_id") || !body["task_id"].is_string() ||
          !body.contains("choice") || !body["choice"].is_string())
        return send_error(res, 400, "expected {\"task_id\": string, \"choice\": \"a\"|\"b\"}");
      const auto choice = parse_choice(body["choice"].get<std::string>());
      if (!choice) return send_error(res, 400, "choice must be \"a\" or \"b\"");
      try {
        const auto r = store_.submit(*who, body["task_id"].get<std::string>(), *choice);
        send_json(res, 200,
                  Json{{"status", r.duplicate ? "duplicate" : "recorded"},
                       {"task_id", body["task_id"]},
                       {"progress", progress(*who)}});
      } catch (const UnknownTask& e) {
        send_error(res, 404, e.what());
      } catch (const JudgmentConflict& e) {
        send_error(res, 409, e.what());
      } catch (const Error& e) {
        send_error(res, 500, e.what());
      }
    });

    srv_.Get("/api/results", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authenticate(req, false)) return send_error(res, 401, "missing or unknown bearer token");
      Json rows = Json::array();
      for (const auto& p : store_.results_summary()) rows.push_back(to_json(p));
      send_json(res, 200, Json{{"pairs", rows}, {"judgments", store_.judgments().size()}});
    });

    srv_.Get(R"(/api/images/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authenticate(req, true)) return send_error(res, 401, "missing or unknown bearer token");
      const auto* task = store_.find(req.matches[1].str());
      if (!task) return send_error(res, 404, "unknown task");
      try {
        const auto bytes = load_image_bytes(task->image_ref, opt_.image_root);
        res.set_content(bytes, content_type_for(task->image_ref));
      } catch (const Error&) {
        send_error(res, 404, "image not available");
      }
    });

    if (opt_.static_dir) srv_.set_mount_point("/", opt_.static_dir->string());
  }

  static std::string content_type_for(const std::string& ref) {
    auto ext = std::filesystem::path(ref).extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "application/octet-stream";
  }

  AnnotationStore& store_;
  AnnotatorTokens tokens_;
  ServerOptions opt_;
  httplib::Server srv_;
};

}  // namespace ricl
