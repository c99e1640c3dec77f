#pragma once

// Human-baseline sessions. Each session is an append-only JSON-lines log
// (create, serve and answer events) that is replayed on startup.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pambench/analysis.hpp"
#include "pambench/trial.hpp"

namespace pambench {

struct SessionAnswer {
  std::size_t cursor = 0;
  std::string trial_ref;
  std::string task;
  std::string answer;
  bool correct = false;
  std::int64_t rt_ms = 0;
  std::int64_t time_ms = 0;
};

struct Session {
  std::string id;
  std::string subject;
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<std::string> queue;  // trial refs, shuffled per seed
  std::size_t cursor = 0;
  std::vector<SessionAnswer> answers;

  bool complete() const noexcept { return cursor == queue.size(); }
};

struct TrialPayload {
  std::string trial_ref;
  std::size_t trial_number = 0;  // 1-based
  std::size_t total = 0;
  std::string instruction;
  std::vector<std::string> frame_urls;
  std::vector<std::string> possible_answers;
};

struct SubmitAck {
  bool ok = true;
  std::size_t progress = 0;  // answers recorded
  std::size_t total = 0;
  bool complete = false;
};

// Deterministic per (dataset trial list, seed).
std::vector<std::string> session_queue(const std::filesystem::path& dataset_root, std::uint64_t seed);

class SessionStore {
 public:
  // `datasets` maps the names clients may ask for to dataset roots.
  SessionStore(std::filesystem::path sessions_dir, std::map<std::string, std::filesystem::path> datasets);

  std::vector<std::string> dataset_names() const;
  std::string create(const std::string& subject, const std::string& dataset, std::uint64_t seed);
  TrialPayload next(const std::string& id);  // UnknownSession, SessionComplete
  // InvalidAnswer, StaleTrial, UnknownSession, SessionComplete
  SubmitAck submit(const std::string& id, const std::string& trial_ref, const std::string& answer, std::int64_t rt_ms);
  Session get(const std::string& id) const;
  std::vector<std::string> session_ids() const;
  std::filesystem::path log_path(const std::string& id) const;

  // Frame image for "<dataset>/<task>/trial{N>}" and a 0-based index; nullopt when unknown.
  std::optional<std::filesystem::path> frame_file(const std::string& dataset_trial, std::size_t index) const;

 private:
  const LoadedTrial& trial(const std::string& dataset, const std::string& ref);
  void append(const std::string& id, const std::string& line);
  void replay(const std::filesystem::path& log);

  std::filesystem::path dir_;
  std::map<std::string, std::filesystem::path> datasets_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, LoadedTrial> trials_;  // "<dataset>/<ref>"
};

// Replays session logs and pools their answers. Throws NoData when no answer
// is found (or, without include_partial, no session is complete).
ScoreTable session_report(const std::vector<std::filesystem::path>& logs, bool include_partial = false);
Session read_session_log(const std::filesystem::path& log);

class HttpService {
 public:
  HttpService(SessionStore& store, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~HttpService();
  int bind(const std::string& host, int port);  // port 0 picks a free one; returns the port
  void listen();                                // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pambench
