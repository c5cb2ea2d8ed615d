#pragma once

// Judgment store: every accepted judgment is appended (fsync'd) to
// <dir>/judgments.jsonl before it is acknowledged. A snapshot
// (<dir>/snapshot.json) records the decoded judgments up to a byte offset of
// the log, so a restart replays only the tail.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ricl/annotation/tasks.hpp"
#include "ricl/core/fs.hpp"
#include "ricl/core/jsonl.hpp"
#include "ricl/eval/judgment.hpp"

namespace ricl {

class UnknownTask : public Error {
 public:
  using Error::Error;
};
class JudgmentConflict : public Error {
 public:
  using Error::Error;
};

enum class Choice { a, b };

inline std::optional<Choice> parse_choice(std::string_view s) {
  if (s == "a" || s == "A") return Choice::a;
  if (s == "b" || s == "B") return Choice::b;
  return std::nullopt;
}

struct HumanJudgment {
  PairwiseJudgment judgment;  // judge=human; left = option a, right = option b
  Choice choice = Choice::a;
};

struct SubmitResult {
  bool duplicate = false;
  std::size_t completed = 0;  // this annotator's judged tasks
};

struct PairResult {
  std::string first;   // lexicographically smaller source label
  std::string second;
  std::size_t tasks = 0;
  std::optional<WinRate> first_rate;  // empty when no judgments yet (pending)
};

class AnnotationStore {
 public:
  AnnotationStore(std::vector<AnnotationTask> tasks, std::filesystem::path dir, std::size_t judgments_per_task = 1,
                  std::size_t snapshot_every = 50)
      : tasks_(std::move(tasks)),
        dir_(std::move(dir)),
        per_task_(judgments_per_task),
        snapshot_every_(snapshot_every) {
    if (per_task_ == 0) throw PreconditionError("judgments_per_task must be >= 1");
    for (std::size_t i = 0; i < tasks_.size(); ++i)
      if (!by_id_.emplace(tasks_[i].task_id, i).second)
        throw PreconditionError("duplicate task id '" + tasks_[i].task_id + "'");
    std::filesystem::create_directories(dir_);
    recover();
    log_ = std::make_unique<JsonlAppender>(log_path(), true);
  }

  std::filesystem::path log_path() const { return dir_ / "judgments.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

  const std::vector<AnnotationTask>& tasks() const { return tasks_; }

  const AnnotationTask* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &tasks_[it->second];
  }

  // First task, in build order, still open and not yet judged by `annotator`.
  std::optional<AnnotationTask> next_task(const std::string& annotator) const {
    std::lock_guard lock(mu_);
    for (const auto& t : tasks_)
      if (count_for(t.task_id) < per_task_ && !choices_.contains({annotator, t.task_id})) return t;
    return std::nullopt;
  }

  SubmitResult submit(const std::string& annotator, const std::string& task_id, Choice choice) {
    std::lock_guard lock(mu_);
    const auto* task = find(task_id);
    if (!task) throw UnknownTask("unknown task '" + task_id + "'");
    if (auto it = choices_.find({annotator, task_id}); it != choices_.end()) {
      if (it->second != choice) throw JudgmentConflict("task '" + task_id + "' was already judged differently");
      return {true, completed_locked(annotator)};
    }
    if (count_for(task_id) >= per_task_) throw JudgmentConflict("task '" + task_id + "' is closed");
    HumanJudgment h;
    h.choice = choice;
    auto& j = h.judgment;
    j.task_id = task_id;
    j.query_record_id = task->query_record_id;
    j.left_source = task->hidden.source_a;
    j.right_source = task->hidden.source_b;
    j.winner = choice == Choice::a ? Winner::left : Winner::right;
    j.judge = JudgeKind::human;
    j.annotator = annotator;
    j.attempts = 1;
    auto line = to_json(j);
    line["choice"] = choice == Choice::a ? "a" : "b";
    log_->append(line);  // durable before acknowledgment
    apply(std::move(h));
    if (snapshot_every_ && judgments_.size() % snapshot_every_ == 0) write_snapshot_locked();
    return {false, completed_locked(annotator)};
  }

  std::vector<PairwiseJudgment> judgments() const {
    std::lock_guard lock(mu_);
    std::vector<PairwiseJudgment> out;
    for (const auto& h : judgments_) out.push_back(h.judgment);
    return out;
  }

  std::size_t completed(const std::string& annotator) const {
    std::lock_guard lock(mu_);
    return completed_locked(annotator);
  }

  // Tasks with their full quota of judgments.
  std::size_t done_tasks() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& t : tasks_) n += count_for(t.task_id) >= per_task_;
    return n;
  }
  std::size_t open_tasks() const { return tasks_.size() - done_tasks(); }

  // Win rates per unordered pair of sources present in the task set.
  std::vector<PairResult> results_summary() const {
    std::lock_guard lock(mu_);
    std::map<std::pair<std::string, std::string>, PairResult> pairs;
    for (const auto& t : tasks_) {
      auto key = std::minmax(t.hidden.source_a, t.hidden.source_b);
      auto& p = pairs[{key.first, key.second}];
      p.first = key.first;
      p.second = key.second;
      ++p.tasks;
    }
    for (auto& [key, p] : pairs) {
      std::vector<PairwiseJudgment> js;
      for (const auto& h : judgments_) {
        const auto k = std::minmax(h.judgment.left_source, h.judgment.right_source);
        if (k.first == key.first && k.second == key.second) js.push_back(h.judgment);
      }
      if (!js.empty()) p.first_rate = win_rate(js, p.first);
    }
    std::vector<PairResult> out;
    for (auto& [k, p] : pairs) out.push_back(std::move(p));
    return out;
  }

  void write_snapshot() {
    std::lock_guard lock(mu_);
    write_snapshot_locked();
  }

 private:
  std::size_t count_for(const std::string& task_id) const {
    auto it = per_task_count_.find(task_id);
    return it == per_task_count_.end() ? 0 : it->second;
  }

  std::size_t completed_locked(const std::string& annotator) const {
    auto it = per_annotator_.find(annotator);
    return it == per_annotator_.end() ? 0 : it->second;
  }

  void apply(HumanJudgment h) {
    choices_[{h.judgment.annotator, h.judgment.task_id}] = h.choice;
    ++per_task_count_[h.judgment.task_id];
    ++per_annotator_[h.judgment.annotator];
    judgments_.push_back(std::move(h));
  }

  static HumanJudgment decode(const Json& j, std::size_t line) {
    HumanJudgment h;
    h.judgment = judgment_from_json(j, line);
    const auto c = parse_choice(require_string(j, "choice", line));
    if (!c) throw SchemaError("bad choice", line);
    h.choice = *c;
    return h;
  }

  void recover() {
    std::uintmax_t offset = 0;
    std::error_code ec;
    if (std::filesystem::exists(log_path(), ec)) truncate_partial_tail(log_path());
    const auto log_size = std::filesystem::exists(log_path(), ec) ? std::filesystem::file_size(log_path()) : 0;
    if (std::filesystem::exists(snapshot_path(), ec)) {
      const auto snap = Json::parse(read_file(snapshot_path()));
      offset = snap.at("log_offset").get<std::uintmax_t>();
      if (offset <= log_size) {
        std::size_t n = 0;
        for (const auto& j : snap.at("judgments")) apply(decode(j, ++n));
      } else {
        offset = 0;  // log replaced under us; trust the log
      }
    }
    if (log_size > offset) {
      const auto data = read_file(log_path());
      std::size_t line_no = 0, pos = static_cast<std::size_t>(offset);
      while (pos < data.size()) {
        const auto nl = data.find('\n', pos);
        const auto line = data.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto h = decode(Json::parse(line), line_no);
        if (choices_.contains({h.judgment.annotator, h.judgment.task_id})) continue;
        apply(h);
      }
    }
  }

  void write_snapshot_locked() {
    Json snap;
    snap["log_offset"] = std::filesystem::file_size(log_path());
    snap["judgments"] = Json::array();
    for (const auto& h : judgments_) {
      auto j = to_json(h.judgment);
      j["choice"] = h.choice == Choice::a ? "a" : "b";
      snap["judgments"].push_back(std::move(j));
    }
    write_file_atomic(snapshot_path(), snap.dump());
  }

  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> by_id_;
  std::filesystem::path dir_;
  std::size_t per_task_;
  std::size_t snapshot_every_;
  std::unique_ptr<JsonlAppender> log_;
  mutable std::mutex mu_;
  std::vector<HumanJudgment> judgments_;
  std::map<std::pair<std::string, std::string>, Choice> choices_;
  std::map<std::string, std::size_t> per_task_count_;
  std::map<std::string, std::size_t> per_annotator_;
};

inline Json to_json(const PairResult& p) {
  Json j{{"pair", {p.first, p.second}}, {"tasks", p.tasks}};
  if (!p.first_rate) {
    j["status"] = "pending";
  } else {
    j["status"] = "ok";
    j["wins"] = Json{{p.first, p.first_rate->wins}, {p.second, p.first_rate->valid - p.first_rate->wins}};
    j["valid"] = p.first_rate->valid;
    j["win_rate"] = Json{{p.first, p.first_rate->rate}, {p.second, 1.0 - p.first_rate->rate}};
  }
  return j;
}

}  // namespace ricl
