#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <random>

#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/json_io.hpp"
#include "pambench/rng.hpp"
#include "pambench/service.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Appends one line and syncs it to disk before returning.
void append_durable(const fs::path& p, const std::string& line) {
  const int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw IoError("cannot open " + p.string());
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      ::close(fd);
      throw IoError("cannot write " + p.string());
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

bool valid_name_part(const std::string& s) { return !s.empty() && s != "." && s != ".." && s.find('/') == s.npos; }

}  // namespace

std::vector<std::string> session_queue(const fs::path& dataset_root, std::uint64_t seed) {
  std::vector<std::string> refs;
  for (const auto& d : list_trial_dirs(dataset_root)) refs.push_back(trial_ref(d));
  Rng rng(derive_seed(seed, label_hash("session-order")));
  rng.shuffle(refs);
  return refs;
}

Session read_session_log(const fs::path& log) {
  const std::string text = read_file_text(log);
  const std::string file = log.string();
  Session s;
  bool created = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    const bool last_unterminated = nl == std::string::npos;
    pos = last_unterminated ? text.size() : nl + 1;
    if (trim(line).empty()) continue;
    Json ev;
    try {
      ev = Json::parse(line);
    } catch (const Json::parse_error&) {
      if (last_unterminated) break;  // torn write from a crash; never acknowledged
      throw SchemaError(file, "", "malformed event line");
    }
    const std::string kind = require_string(ev, "event", file);
    if (kind == "create") {
      s.id = require_string(ev, "session_id", file);
      s.subject = require_string(ev, "subject", file);
      s.dataset = require_string(ev, "dataset", file);
      s.seed = require_uint(ev, "seed", file);
      const Json& q = require(ev, "queue", file);
      if (!q.is_array()) throw SchemaError(file, "queue", "expected an array");
      for (const Json& r : q) s.queue.push_back(r.get<std::string>());
      created = true;
    } else if (kind == "answer") {
      if (!created) throw SchemaError(file, "event", "answer before create");
      SessionAnswer a;
      a.cursor = static_cast<std::size_t>(require_uint(ev, "cursor", file));
      a.trial_ref = require_string(ev, "trial_ref", file);
      a.task = require_string(ev, "task", file);
      a.answer = require_string(ev, "answer", file);
      const Json& c = require(ev, "correct", file);
      if (!c.is_boolean()) throw SchemaError(file, "correct", "expected a boolean");
      a.correct = c.get<bool>();
      a.rt_ms = require_int(ev, "rt_ms", file);
      a.time_ms = require_int(ev, "time_ms", file);
      if (a.cursor != s.cursor) continue;  // duplicate of an already recorded answer
      if (a.cursor >= s.queue.size() || s.queue[a.cursor] != a.trial_ref) {
        throw SchemaError(file, "trial_ref", "answer does not match the queue");
      }
      s.answers.push_back(a);
      ++s.cursor;
    } else if (kind != "serve") {
      throw SchemaError(file, "event", "unknown event \"" + kind + "\"");
    }
  }
  if (!created) throw SchemaError(file, "event", "no create event");
  return s;
}

ScoreTable session_report(const std::vector<fs::path>& logs, bool include_partial) {
  std::vector<Outcome> outcomes;
  for (const auto& log : logs) {
    const Session s = read_session_log(log);
    if (!s.complete() && !include_partial) continue;
    for (const auto& a : s.answers) outcomes.push_back({a.task, a.correct, false});
  }
  if (outcomes.empty()) throw NoData("no answers in the given sessions");
  return score_outcomes(outcomes, "Human");
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(fs::path sessions_dir, std::map<std::string, fs::path> datasets)
    : dir_(std::move(sessions_dir)), datasets_(std::move(datasets)) {
  for (const auto& [name, root] : datasets_) {
    if (!valid_name_part(name)) throw InvalidParams("bad dataset name \"" + name + "\"");
    if (!fs::is_directory(root)) throw MissingFile("no dataset at " + root.string());
  }
  fs::create_directories(dir_);
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") replay(e.path());
  }
}

void SessionStore::replay(const fs::path& log) {
  Session s = read_session_log(log);
  sessions_[s.id] = std::move(s);
}

std::vector<std::string> SessionStore::dataset_names() const {
  std::vector<std::string> out;
  for (const auto& [name, root] : datasets_) out.push_back(name);
  return out;
}

fs::path SessionStore::log_path(const std::string& id) const { return dir_ / (id + ".jsonl"); }

void SessionStore::append(const std::string& id, const std::string& line) { append_durable(log_path(id), line); }

const LoadedTrial& SessionStore::trial(const std::string& dataset, const std::string& ref) {
  const std::string key = dataset + "/" + ref;
  auto it = trials_.find(key);
  if (it == trials_.end()) it = trials_.emplace(key, read_trial(datasets_.at(dataset) / ref)).first;
  return it->second;
}

std::string SessionStore::create(const std::string& subject, const std::string& dataset, std::uint64_t seed) {
  std::lock_guard lock(mu_);
  auto ds = datasets_.find(dataset);
  if (ds == datasets_.end()) throw InvalidParams("unknown dataset \"" + dataset + "\"");
  Session s;
  static std::atomic<std::uint64_t> counter{0};
  char buf[32];
  do {
    const std::uint64_t r = mix64(std::random_device{}() ^ (static_cast<std::uint64_t>(now_ms()) << 20) ^ ++counter);
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(r));
  } while (sessions_.count(buf));
  s.id = buf;
  s.subject = subject;
  s.dataset = dataset;
  s.seed = seed;
  s.queue = session_queue(ds->second, seed);
  if (s.queue.empty()) throw NoData("dataset \"" + dataset + "\" has no trials");
  Json ev = {{"event", "create"}, {"session_id", s.id}, {"subject", subject}, {"dataset", dataset},
             {"seed", seed},      {"queue", s.queue},    {"time_ms", now_ms()}};
  append(s.id, ev.dump());
  const std::string id = s.id;
  sessions_[id] = std::move(s);
  return id;
}

TrialPayload SessionStore::next(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("unknown session \"" + id + "\"");
  Session& s = it->second;
  if (s.complete()) throw SessionComplete("session \"" + id + "\" is complete");
  const std::string& ref = s.queue[s.cursor];
  const LoadedTrial& lt = trial(s.dataset, ref);
  TrialPayload p;
  p.trial_ref = ref;
  p.trial_number = s.cursor + 1;
  p.total = s.queue.size();
  p.instruction = lt.trial.instruction;
  for (std::size_t i = 0; i < lt.frames.size(); ++i) {
    p.frame_urls.push_back("/api/frames/" + s.dataset + "/" + ref + "/" + std::to_string(i));
  }
  for (const auto& a : lt.trial.possible_answers) p.possible_answers.push_back(to_string(a));
  append(id, Json{{"event", "serve"}, {"cursor", s.cursor}, {"trial_ref", ref}, {"time_ms", now_ms()}}.dump());
  return p;
}

SubmitAck SessionStore::submit(const std::string& id, const std::string& trial_ref, const std::string& answer,
                               std::int64_t rt_ms) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("unknown session \"" + id + "\"");
  Session& s = it->second;
  auto ack = [&] { return SubmitAck{true, s.cursor, s.queue.size(), s.complete()}; };
  auto parsed = Answer::parse(to_lower(trim(answer)));
  if (parsed && !s.answers.empty() && s.answers.back().trial_ref == trial_ref &&
      s.answers.back().answer == to_string(*parsed)) {
    return ack();  // repeated submission of the last answer
  }
  if (s.complete()) throw SessionComplete("session \"" + id + "\" is complete");
  if (trial_ref != s.queue[s.cursor]) {
    throw StaleTrial("trial \"" + trial_ref + "\" is not the current trial \"" + s.queue[s.cursor] + "\"");
  }
  const LoadedTrial& lt = trial(s.dataset, trial_ref);
  const auto& possible = lt.trial.possible_answers;
  if (!parsed || std::find(possible.begin(), possible.end(), *parsed) == possible.end()) {
    throw InvalidAnswer("\"" + answer + "\" is not a possible answer for this trial");
  }
  if (rt_ms < 0) throw InvalidAnswer("response time must be non-negative");
  SessionAnswer a;
  a.cursor = s.cursor;
  a.trial_ref = trial_ref;
  a.task = lt.trial.kind ? std::string(to_string(*lt.trial.kind)) : lt.trial.task;
  a.answer = to_string(*parsed);
  a.correct = *parsed == lt.trial.answer;
  a.rt_ms = rt_ms;
  a.time_ms = now_ms();
  append(id, Json{{"event", "answer"},
                  {"cursor", a.cursor},
                  {"trial_ref", a.trial_ref},
                  {"task", a.task},
                  {"answer", a.answer},
                  {"correct", a.correct},
                  {"rt_ms", a.rt_ms},
                  {"time_ms", a.time_ms}}
                 .dump());
  s.answers.push_back(a);
  ++s.cursor;
  return ack();
}

Session SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("unknown session \"" + id + "\"");
  return it->second;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::optional<fs::path> SessionStore::frame_file(const std::string& dataset_trial, std::size_t index) const {
  // "<dataset>/<task>/trial{N}"
  const auto a = dataset_trial.find('/');
  if (a == std::string::npos) return std::nullopt;
  const auto b = dataset_trial.find('/', a + 1);
  if (b == std::string::npos) return std::nullopt;
  const std::string dataset = dataset_trial.substr(0, a);
  const std::string task = dataset_trial.substr(a + 1, b - a - 1);
  const std::string trial = dataset_trial.substr(b + 1);
  if (!valid_name_part(task) || !valid_name_part(trial) || !trial.starts_with("trial")) return std::nullopt;
  auto ds = datasets_.find(dataset);
  if (ds == datasets_.end()) return std::nullopt;
  const fs::path p = ds->second / task / trial / "frames" / ("epoch" + std::to_string(index) + ".png");
  if (!fs::is_regular_file(p)) return std::nullopt;
  return p;
}

}  // namespace pambench
