#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "doctest.h"
#include "json.hpp"
#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/language.hpp"
#include "pambench/util.hpp"
#include "support/golden.hpp"
#include "support/mock_models.hpp"
#include "test_support.hpp"

using namespace pambench;
using namespace pambench::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GoldenFixture {
  TempDir tmp;
  LoadedTrial lt;
  GoldenFixture() {
    Trial t = make_trial("golden", std::nullopt, 0, golden_instance(), AnswerSpacePolicy::exact, 0,
                         test_pack().digest());
    lt = read_trial(write_trial(tmp / "golden", t, test_pack(), {}));
  }
};

std::vector<Part::Type> part_types(const MessageSeq& m) {
  std::vector<Part::Type> out;
  for (const auto& p : m.turns.at(0).parts) out.push_back(p.type);
  return out;
}

int images_in(const MessageSeq& m) {
  int n = 0;
  for (const auto& t : m.turns)
    for (const auto& p : t.parts) n += p.type == Part::Type::image;
  return n;
}

RetryPolicy no_sleep(int retries = 3) {
  RetryPolicy p;
  p.max_retries = retries;
  p.sleep = [](std::chrono::milliseconds) {};
  return p;
}

std::vector<std::string> gt_bodies(const Trial& t) {
  std::vector<std::string> out;
  for (const auto& c : t.captions) out.push_back(strip_caption_prefix(c));
  return out;
}

}  // namespace

TEST_CASE("prompt shapes per mode") {
  GoldenFixture g;
  const auto base = build_prompt(g.lt, EvalMode::base);
  REQUIRE(base.turns.size() == 1);
  CHECK(base.turns[0].role == "user");
  CHECK(images_in(base) == 9);
  CHECK(flatten_user_text(base).find("Frame 1:") == std::string::npos);
  const std::string base_text = flatten_user_text(base);
  CHECK(base_text.starts_with("In this task, we will show you a series of frame images."));
  CHECK(base_text.ends_with("(true, false, bottom right, bottom left, top left, top right). Think step-by-step, "
                            "analyze each frame and provide your answer here:\nAnswers:\nLet's think step by step."));
  CHECK(base_text.find("Task instruction: " + std::string(kGoldenInstruction)) != std::string::npos);
  for (const auto& p : base.turns[0].parts) {
    if (p.type == Part::Type::image) {
      CHECK(p.media_type == "image/png");
      CHECK_FALSE(p.data.empty());
    }
  }

  const auto pc = build_prompt(g.lt, EvalMode::pc);
  CHECK(images_in(pc) == 0);
  const std::string pc_text = flatten_user_text(pc);
  CHECK(pc_text.starts_with("In this task, we will show you a series of frames described by captions."));
  CHECK(pc_text.find("Here are the frame captions:\nFrame 1: A chairs located at the top right\nFrame 2: ") !=
        std::string::npos);
  for (int i = 1; i <= 9; ++i) CHECK(pc_text.find("Frame " + std::to_string(i) + ": ") != std::string::npos);

  const auto sc = build_prompt(g.lt, EvalMode::sc, gt_bodies(g.lt.trial));
  CHECK(images_in(sc) == 0);
  CHECK(sc == pc);

  const auto sci = build_prompt(g.lt, EvalMode::sc_i, gt_bodies(g.lt.trial));
  const auto types = part_types(sci);
  REQUIRE(types.size() == 2 + 2 * 9);
  CHECK(types.front() == Part::Type::text);
  CHECK(types.back() == Part::Type::text);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(types[1 + 2 * i] == Part::Type::image);
    CHECK(types[2 + 2 * i] == Part::Type::text);
    CHECK(sci.turns[0].parts[2 + 2 * i].text.starts_with("Frame " + std::to_string(i + 1) + ": "));
  }
}

TEST_CASE("prompt preconditions") {
  GoldenFixture g;
  CHECK_THROWS_AS(build_prompt(g.lt, EvalMode::sc), MissingCaptions);
  CHECK_THROWS_AS(build_prompt(g.lt, EvalMode::sc_i, std::vector<std::string>(8, "delay frame")),
                  CaptionCountMismatch);
  auto caps = gt_bodies(g.lt.trial);
  caps[3] = "  ";
  CHECK_THROWS_AS(build_prompt(g.lt, EvalMode::sc, caps), EmptyCaption);
  LoadedTrial reduced = g.lt;
  reduced.trial.captions.clear();
  CHECK_THROWS_AS(build_prompt(reduced, EvalMode::pc), MissingCaptions);
}

TEST_CASE("payloads are deterministic") {
  GoldenFixture g;
  ChatRequest a{build_prompt(g.lt, EvalMode::base), 1024, 0.0, RequestPurpose::answer};
  ChatRequest b{build_prompt(g.lt, EvalMode::base), 1024, 0.0, RequestPurpose::answer};
  CHECK(request_payload(a, "m") == request_payload(b, "m"));
  const json j = json::parse(request_payload(a, "m"));
  CHECK(j["model"] == "m");
  CHECK(j["max_tokens"] == 1024);
  CHECK(j["temperature"] == 0.0);
  CHECK(j["messages"][0]["content"][1]["type"] == "image_url");
  CHECK(j["messages"][0]["content"][1]["image_url"]["url"].get<std::string>().starts_with("data:image/png;base64,"));
}

TEST_CASE("answer extraction fallback") {
  AnswerSet locs;
  for (auto l : kAllLocations) locs.emplace_back(l);
  const AnswerSet tf = {Answer(true), Answer(false)};
  CHECK(scan_for_answer("...so the answer is top right.", locs) == Answer(Location::top_right));
  CHECK(scan_for_answer("It could be true... no, false.", tf) == Answer(false));
  CHECK_FALSE(scan_for_answer("I cannot tell.", full_vocabulary()).has_value());
  CHECK(scan_for_answer("TOP LEFT, or maybe Bottom Right", locs) == Answer(Location::bottom_right));
  CHECK_FALSE(scan_for_answer("untrue", tf).has_value());
  CHECK(scan_for_answer("the chairs, not the cars", full_vocabulary()) == Answer(Category::cars));
  // "top right" is not read as a bare "right"; no such answer exists, but longer wins over shorter
  CHECK(scan_for_answer("top right", locs) == Answer(Location::top_right));
}

TEST_CASE("extractor output is checked against the answer set") {
  AnswerSet locs;
  for (auto l : kAllLocations) locs.emplace_back(l);
  FixedModel says_top_left(" Top Left\n");
  CHECK(extract_answer("blah top right", locs, &says_top_left) == Answer(Location::top_left));
  FixedModel says_true("true");
  CHECK(extract_answer("blah top right", locs, &says_true) == Answer(Location::top_right));
  FixedModel says_both("top left or top right");
  CHECK(extract_answer("nothing here", locs, &says_both) == std::nullopt);
  FlakyModel down(100, 400, "x");
  CHECK(extract_answer("bottom left", locs, &down) == Answer(Location::bottom_left));
}

TEST_CASE("retry with backoff") {
  ChatRequest req{MessageSeq{{Turn{"user", {Part::make_text("hi")}}}}, 10, 0.0, RequestPurpose::answer};
  FlakyModel twice(2, 503, "ok");
  std::vector<RetryRecord> rec;
  std::vector<std::chrono::milliseconds> slept;
  RetryPolicy p = no_sleep(3);
  p.sleep = [&](std::chrono::milliseconds d) { slept.push_back(d); };
  CHECK(call_with_retry(twice, req, p, &rec).text == "ok");
  CHECK(rec.size() == 2);
  CHECK(twice.calls == 3);
  REQUIRE(slept.size() == 2);
  CHECK(slept[0].count() >= 1000);
  CHECK(slept[0].count() <= 1250);
  CHECK(slept[1].count() >= 2000);
  CHECK(slept[1].count() <= 2500);

  FlakyModel always(10, 429, "ok");
  CHECK_THROWS_AS(call_with_retry(always, req, no_sleep(3)), EndpointError);
  CHECK(always.calls == 4);

  FlakyModel bad(1, 400, "ok");
  CHECK_THROWS_AS(call_with_retry(bad, req, no_sleep(3)), EndpointError);
  CHECK(bad.calls == 1);
}

TEST_CASE("captioning pre-pass") {
  GoldenFixture g;
  UniformRandomModel echo(1);
  RecordingModel rec(echo);
  const auto caps = caption_frames(g.lt, rec, no_sleep());
  CHECK(caps == gt_bodies(g.lt.trial));
  REQUIRE(rec.payloads.size() == 9);
  for (const auto& [purpose, payload] : rec.payloads) {
    CHECK(purpose == RequestPurpose::caption);
    const json j = json::parse(payload);
    REQUIRE(j["messages"].size() == 1);
    CHECK(j["messages"][0]["content"].size() == 2);
    CHECK(j["messages"][0]["content"][0]["text"] == std::string(kSelfCaptionPrompt));
  }
  FixedModel blank("   ");
  CHECK_THROWS_AS(caption_frames(g.lt, blank, no_sleep()), EmptyCaption);
}

TEST_CASE("run_trial per mode") {
  GoldenFixture g;
  PerfectReasoner perfect;
  EvalConfig cfg;
  cfg.retry = no_sleep();
  for (EvalMode m : {EvalMode::pc, EvalMode::sc, EvalMode::sc_i}) {
    cfg.mode = m;
    const auto r = run_trial(g.lt, perfect, cfg);
    CHECK_FALSE(r.error_class.has_value());
    CHECK(r.correct);
    CHECK(r.extracted == Answer(Location::top_right));
    CHECK(r.self_captions.size() == (m == EvalMode::pc ? 0u : 9u));
  }
  LoadedTrial reduced = g.lt;
  reduced.trial.captions.clear();
  cfg.mode = EvalMode::pc;
  const auto r = run_trial(reduced, perfect, cfg);
  CHECK(r.error_class == "MissingCaptions");
  CHECK_FALSE(r.correct);

  FlakyModel down(100, 500, "");
  cfg.mode = EvalMode::base;
  cfg.retry = no_sleep(2);
  const auto e = run_trial(g.lt, down, cfg);
  CHECK(e.error_class == "EndpointError");
  CHECK(e.retries == 2);

  const auto back = result_from_text(result_to_text(e), "x.json");
  CHECK(back.error_class == e.error_class);
  CHECK(back.trial_ref == "golden/trial0");
}

TEST_CASE("run_eval: parallelism, resume, summary") {
  TempDir tmp;
  DatasetSpec spec;
  spec.entries = {{"Perc-Loc-R", 1, 6, std::nullopt}, {"CVR-Cat-L", 1, 6, std::nullopt}};
  generate_dataset(spec, test_pack(), tmp / "ds");
  EvalConfig cfg;
  cfg.retry = no_sleep();
  cfg.mode = EvalMode::sc;

  UniformRandomModel model(5);
  cfg.parallelism = 1;
  const auto s1 = run_eval(tmp / "ds", model, cfg, tmp / "r1");
  cfg.parallelism = 8;
  const auto s8 = run_eval(tmp / "ds", model, cfg, tmp / "r8");
  CHECK(s1.n_trials == 12);
  CHECK(s1.requested == 12);
  CHECK(s1.errored == 0);
  CHECK(s8.correct == s1.correct);
  for (const auto& d : list_trial_dirs(tmp / "ds")) {
    const auto a = read_result(result_path(tmp / "r1", d));
    const auto b = read_result(result_path(tmp / "r8", d));
    CHECK(a.extracted == b.extracted);
    CHECK(a.self_captions == b.self_captions);
  }
  const json summary = json::parse(read_file_text(tmp / "r1" / "summary.json"));
  CHECK(summary["n_trials"] == 12);
  CHECK(summary["mode"] == "SC");

  // resume: only missing results are requested again
  const auto dirs = list_trial_dirs(tmp / "ds");
  fs::remove(result_path(tmp / "r8", dirs[2]));
  fs::remove(result_path(tmp / "r8", dirs[7]));
  FixedModel counter("true");
  cfg.mode = EvalMode::base;
  const auto again = run_eval(tmp / "ds", counter, cfg, tmp / "r8");
  CHECK(again.requested == 2);
  CHECK(counter.calls == 2);
  CHECK(again.n_trials == 12);
}

TEST_CASE("HTTP client speaks the chat-completions protocol") {
  httplib::Server srv;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body, seen_path;
  std::mutex mu;
  srv.Post(R"(/v1/chat/completions)", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++hits;
    {
      std::lock_guard lock(mu);
      seen_auth = req.get_header_value("Authorization");
      seen_body = req.body;
      seen_path = req.path;
    }
    if (n == 1) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      res.set_content("{\"error\":\"slow down\"}", "application/json");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"The answer is top right."}}],)"
                    R"("usage":{"prompt_tokens":11,"completion_tokens":7}})",
                    "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  ::setenv("PAMBENCH_TEST_KEY", "sekret", 1);
  ModelEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  ep.model = "test-model";
  ep.api_key_env = "PAMBENCH_TEST_KEY";
  HttpChatClient client(ep);
  ChatRequest req{MessageSeq{{Turn{"user", {Part::make_text("hello")}}}}, 64, 0.0, RequestPurpose::answer};
  std::vector<RetryRecord> rec;
  const auto r = call_with_retry(client, req, no_sleep(), &rec);
  srv.stop();
  th.join();

  CHECK(r.text == "The answer is top right.");
  CHECK(r.usage.prompt_tokens == 11);
  CHECK(r.usage.completion_tokens == 7);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].status == 429);
  CHECK(seen_path == "/v1/chat/completions");
  CHECK(seen_auth == "Bearer sekret");
  CHECK(seen_body == request_payload(req, "test-model"));

  ModelEndpoint bad = ep;
  bad.base_url = "not a url";
  CHECK_THROWS_AS(HttpChatClient{bad}, InvalidParams);
  bad = ep;
  bad.api_key_env = "PAMBENCH_TEST_KEY_UNSET_XYZ";
  HttpChatClient no_key(bad);
  CHECK_THROWS_AS(no_key.complete(req), EndpointError);
}
