#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/json_io.hpp"
#include "pambench/service.hpp"
#include "pambench/util.hpp"
#include "test_support.hpp"

using namespace pambench;
namespace fs = std::filesystem;

namespace {

// 22 kinds x 5 trials, generated once.
const fs::path& baseline_root() {
  static TempDir dir;
  static const fs::path root = [] {
    generate_dataset(dataset_preset("human-baseline", 5, 0), test_pack(), dir / "hb", 2);
    return dir / "hb";
  }();
  return root;
}

std::string truth(const std::string& ref) { return to_string(read_trial(baseline_root() / ref).trial.answer); }

std::string wrong(const TrialPayload& p, const std::string& right) {
  for (const auto& a : p.possible_answers)
    if (a != right) return a;
  return right;
}

// Answers every remaining trial; correct on every `every`-th trial (0 = always).
void finish(SessionStore& st, const std::string& id, int every = 0) {
  int i = 0;
  while (!st.get(id).complete()) {
    const auto p = st.next(id);
    const std::string t = truth(p.trial_ref);
    const bool ok = every == 0 || i++ % every == 0;
    st.submit(id, p.trial_ref, ok ? t : wrong(p, t), 800);
  }
}

std::size_t count_events(const fs::path& log, const std::string& kind) {
  std::size_t n = 0;
  std::istringstream in(read_file_text(log));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && Json::parse(line).at("event") == kind) ++n;
  return n;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_CASE("session runs a full baseline") {
  TempDir tmp;
  SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
  CHECK(st.dataset_names() == std::vector<std::string>{"hb"});
  const auto id = st.create("subj-1", "hb", 3);
  CHECK_THROWS_AS(st.create("x", "missing", 0), InvalidParams);

  const auto p = st.next(id);
  CHECK(p.trial_number == 1);
  CHECK(p.total == 110);
  CHECK(p.frame_urls.size() == read_trial(baseline_root() / p.trial_ref).frames.size());
  CHECK(p.frame_urls[0] == "/api/frames/hb/" + p.trial_ref + "/0");
  // serving the same trial twice is allowed and does not advance
  CHECK(st.next(id).trial_ref == p.trial_ref);

  finish(st, id);
  const Session s = st.get(id);
  CHECK(s.complete());
  CHECK(s.answers.size() == 110);
  CHECK_THROWS_AS(st.next(id), SessionComplete);
  CHECK_THROWS_AS(st.submit(id, p.trial_ref, "yes", 1), SessionComplete);
  CHECK_THROWS_AS(st.next("s-nope"), UnknownSession);

  const auto t = session_report({st.log_path(id)});
  CHECK(t.tasks.size() == 22);
  for (const auto& c : t.tasks) {
    CHECK(c.n == 5);
    CHECK(c.correct == 5);
  }
}

TEST_CASE("submission validation") {
  TempDir tmp;
  SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
  const auto id = st.create("subj-2", "hb", 11);
  const auto p = st.next(id);
  const std::string t = truth(p.trial_ref);

  CHECK_THROWS_AS(st.submit(id, p.trial_ref, "maybe", 100), InvalidAnswer);
  CHECK_THROWS_AS(st.submit(id, p.trial_ref, t, -1), InvalidAnswer);
  const std::string other = st.get(id).queue[1];
  CHECK_THROWS_AS(st.submit(id, other, truth(other), 100), StaleTrial);
  CHECK(st.get(id).cursor == 0);

  const auto ack = st.submit(id, p.trial_ref, "  " + upper(t) + " ", 100);
  CHECK(ack.progress == 1);
  CHECK_FALSE(ack.complete);
  // retransmission of the same answer is acknowledged without a second record
  const auto again = st.submit(id, p.trial_ref, t, 250);
  CHECK(again.progress == 1);
  CHECK(count_events(st.log_path(id), "answer") == 1);
  // a different answer to a finished trial is stale
  CHECK_THROWS_AS(st.submit(id, p.trial_ref, wrong(p, t), 100), StaleTrial);
  CHECK(st.get(id).answers[0].answer == t);
  CHECK(st.get(id).answers[0].correct);
}

TEST_CASE("sessions survive restart") {
  TempDir tmp;
  std::string id;
  std::vector<std::string> queue;
  {
    SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
    id = st.create("subj-3", "hb", 5);
    for (int i = 0; i < 7; ++i) {
      const auto p = st.next(id);
      st.submit(id, p.trial_ref, truth(p.trial_ref), 10);
    }
    queue = st.get(id).queue;
  }
  // a crash mid-write leaves a partial last line
  {
    std::ofstream f(tmp / "sessions" / (id + ".jsonl"), std::ios::app);
    f << R"({"event":"answer","cursor":7,"trial_)";
  }
  SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
  const Session s = st.get(id);
  CHECK(s.cursor == 7);
  CHECK(s.queue == queue);
  CHECK(s.answers.size() == 7);
  CHECK(st.next(id).trial_ref == queue[7]);
}

TEST_CASE("session order is seeded") {
  const auto a = session_queue(baseline_root(), 42);
  CHECK(a == session_queue(baseline_root(), 42));
  CHECK(a != session_queue(baseline_root(), 43));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  auto listed = std::vector<std::string>{};
  for (const auto& d : list_trial_dirs(baseline_root())) listed.push_back(trial_ref(d));
  std::sort(listed.begin(), listed.end());
  CHECK(sorted == listed);
}

TEST_CASE("session report pools subjects") {
  TempDir tmp;
  SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
  std::vector<fs::path> logs;
  for (int s = 0; s < 8; ++s) {
    const auto id = st.create("subj-" + std::to_string(s), "hb", 100 + s);
    finish(st, id, 2);
    logs.push_back(st.log_path(id));
  }
  const auto partial = st.create("late", "hb", 9);
  const auto p = st.next(partial);
  st.submit(partial, p.trial_ref, truth(p.trial_ref), 5);
  logs.push_back(st.log_path(partial));

  const auto t = session_report(logs);
  std::uint64_t n = 0;
  for (const auto& c : t.tasks) n += c.n;
  CHECK(n == 880);
  std::uint64_t with_partial = 0;
  for (const auto& c : session_report(logs, true).tasks) with_partial += c.n;
  CHECK(with_partial == 881);

  const auto empty = st.create("idle", "hb", 1);
  CHECK_THROWS_AS(session_report({st.log_path(empty)}), NoData);
  CHECK_THROWS_AS(session_report({st.log_path(partial)}), NoData);
  CHECK_THROWS_AS(session_report({}), NoData);
}

TEST_CASE("http service") {
  TempDir tmp;
  fs::create_directories(tmp / "ui");
  write_file_atomic(tmp / "ui" / "index.html", "<html>ui</html>");
  SessionStore st(tmp / "sessions", {{"hb", baseline_root()}});
  HttpService svc(st, tmp / "ui");
  const int port = svc.bind("127.0.0.1", 0);
  std::thread th([&] { svc.listen(); });
  httplib::Client cli("127.0.0.1", port);

  auto res = cli.Get("/api/datasets");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["datasets"] == Json::array({"hb"}));
  CHECK(cli.Get("/index.html")->body == "<html>ui</html>");

  res = cli.Post("/api/sessions", R"({"subject":"web","dataset":"hb","seed":2})", "application/json");
  REQUIRE(res->status == 201);
  const std::string id = Json::parse(res->body)["session_id"];
  CHECK(cli.Post("/api/sessions", "{not json", "application/json")->status == 400);
  CHECK(cli.Get("/api/sessions/nobody/next")->status == 404);

  res = cli.Get("/api/sessions/" + id + "/next");
  REQUIRE(res->status == 200);
  const Json next = Json::parse(res->body);
  CHECK_FALSE(next.contains("answer"));
  CHECK(next["total"] == 110);
  const std::string ref = next["trial_ref"];
  CHECK(res->body.find("ground") == std::string::npos);

  auto frame = cli.Get(next["frames"][0].get<std::string>());
  REQUIRE(frame->status == 200);
  CHECK(frame->get_header_value("Content-Type") == "image/png");
  CHECK(frame->body.substr(1, 3) == "PNG");
  CHECK(cli.Get("/api/frames/hb/../../etc/0")->status == 404);

  auto post = [&](const std::string& r, const std::string& a) {
    return cli.Post("/api/sessions/" + id + "/answers", Json{{"trial_ref", r}, {"answer", a}, {"rt_ms", 900}}.dump(),
                    "application/json");
  };
  res = post(ref, "maybe");
  CHECK(res->status == 400);
  CHECK(Json::parse(res->body)["error"] == "InvalidAnswer");
  res = post(ref, truth(ref));
  REQUIRE(res->status == 200);
  CHECK(Json::parse(res->body) == Json{{"ok", true}, {"progress", 1}, {"total", 110}, {"complete", false}});
  CHECK(post(ref, truth(ref))->status == 200);
  const std::string later = st.get(id).queue[5];
  res = post(later, truth(later));
  CHECK(res->status == 409);
  CHECK(Json::parse(res->body)["error"] == "StaleTrial");

  res = cli.Get("/api/sessions/" + id + "/report");
  REQUIRE(res->status == 200);
  CHECK(Json::parse(res->body)["tasks"][0]["n"] == 1);
  CHECK(Json::parse(cli.Get("/api/sessions/" + id)->body)["progress"] == 1);

  svc.stop();
  th.join();
}
