#include "pambench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/json_io.hpp"
#include "pambench/language.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace fs = std::filesystem;

const std::string_view kExtractionPrompt =
    "Below is a model's response to a question whose answer must be one of these options: {options}. Reply with "
    "only the option the response gives as its final answer, written exactly as listed. If the response gives no "
    "final answer, reply with \"none\".\n\nResponse:\n{response}";

namespace {

std::chrono::milliseconds backoff_delay(const RetryPolicy& p, int attempt) {
  thread_local Rng jitter_rng(std::random_device{}());
  double ms = static_cast<double>(p.base.count());
  for (int i = 0; i < attempt; ++i) ms *= p.factor;
  ms += ms * 0.25 * jitter_rng.unit();
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string error_class_of(const std::exception& e) {
  if (dynamic_cast<const EndpointError*>(&e)) return "EndpointError";
  if (dynamic_cast<const MissingCaptions*>(&e)) return "MissingCaptions";
  if (dynamic_cast<const CaptionCountMismatch*>(&e)) return "CaptionCountMismatch";
  if (dynamic_cast<const EmptyCaption*>(&e)) return "EmptyCaption";
  if (dynamic_cast<const SchemaError*>(&e)) return "SchemaError";
  if (dynamic_cast<const MissingFile*>(&e)) return "MissingFile";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

void add_usage(TokenUsage& into, const TokenUsage& u) {
  into.prompt_tokens += u.prompt_tokens;
  into.completion_tokens += u.completion_tokens;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
  return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

// ---------------------------------------------------------------------------

ChatResponse call_with_retry(ChatClient& client, const ChatRequest& req, const RetryPolicy& policy,
                             std::vector<RetryRecord>* retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return client.complete(req);
    } catch (const EndpointError& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      auto delay = backoff_delay(policy, attempt);
      if (e.retry_after() && *e.retry_after() > delay) delay = *e.retry_after();
      if (retries) retries->push_back({attempt + 1, e.status(), e.what(), delay});
      if (policy.sleep) {
        policy.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

std::vector<std::string> caption_frames(const LoadedTrial& trial, ChatClient& client, const RetryPolicy& policy,
                                        int max_tokens, std::vector<RetryRecord>* retries, TokenUsage* usage) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < trial.frames.size(); ++i) {
    ChatRequest req{caption_request(trial.frames[i]), max_tokens, 0.0, RequestPurpose::caption};
    ChatResponse r = call_with_retry(client, req, policy, retries);
    if (usage) add_usage(*usage, r.usage);
    std::string caption = trim(r.text);
    if (caption.empty()) throw EmptyCaption("empty caption for frame " + std::to_string(i + 1));
    out.push_back(std::move(caption));
  }
  return out;
}

std::optional<Answer> scan_for_answer(std::string_view response, const AnswerSet& possible) {
  const std::string text = to_lower(response);
  struct Match {
    std::size_t start, end;
    Answer answer;
  };
  std::vector<Match> matches;
  for (const Answer& a : possible) {
    const std::string word = to_string(a);
    for (auto p = text.find(word); p != std::string::npos; p = text.find(word, p + 1)) {
      const std::size_t end = p + word.size();
      if (p > 0 && is_word_char(text[p - 1])) continue;
      if (end < text.size() && is_word_char(text[end])) continue;
      matches.push_back({p, end, a});
    }
  }
  std::optional<Match> best;
  for (const Match& m : matches) {
    const bool inside_longer = std::any_of(matches.begin(), matches.end(), [&](const Match& o) {
      return o.start <= m.start && m.end <= o.end && (o.end - o.start) > (m.end - m.start);
    });
    if (inside_longer) continue;
    if (!best || m.start > best->start || (m.start == best->start && m.end > best->end)) best = m;
  }
  if (!best) return std::nullopt;
  return best->answer;
}

std::optional<Answer> extract_answer(std::string_view response, const AnswerSet& possible, ChatClient* extractor,
                                     const RetryPolicy* policy) {
  if (extractor) {
    std::string prompt = replace_all(std::string(kExtractionPrompt), "{options}", format_answer_list(possible));
    prompt = replace_all(std::move(prompt), "{response}", response);
    ChatRequest req{MessageSeq{{Turn{"user", {Part::make_text(std::move(prompt))}}}}, 50, 0.0,
                    RequestPurpose::extract};
    try {
      const ChatResponse r = policy ? call_with_retry(*extractor, req, *policy) : extractor->complete(req);
      const std::string said = to_lower(trim(r.text));
      std::optional<Answer> hit;
      int hits = 0;
      for (const Answer& a : possible) {
        if (to_string(a) == said) {
          hit = a;
          ++hits;
        }
      }
      if (hits == 1) return hit;
    } catch (const EndpointError&) {
      // fall through to the deterministic scan
    }
  }
  return scan_for_answer(response, possible);
}

// ---------------------------------------------------------------------------
// Results

std::string result_to_text(const TrialResult& r) {
  Json caps = Json::array();
  for (const auto& c : r.self_captions) caps.push_back(c);
  Json j = {{"format", "pambench-trial-result"},
            {"version", 1},
            {"trial_ref", r.trial_ref},
            {"task", r.task},
            {"kind", r.kind ? Json(to_string(*r.kind)) : Json(nullptr)},
            {"trial_id", r.trial_id},
            {"mode", to_string(r.mode)},
            {"model", r.model},
            {"response", r.response},
            {"self_captions", std::move(caps)},
            {"extracted", r.extracted ? Json(to_string(*r.extracted)) : Json(nullptr)},
            {"ground_truth", to_string(r.ground_truth)},
            {"correct", r.correct},
            {"error_class", r.error_class ? Json(*r.error_class) : Json(nullptr)},
            {"error_message", r.error_message},
            {"latency_ms", r.latency_ms},
            {"usage", {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}}},
            {"retries", r.retries}};
  return dump_json(j);
}

TrialResult result_from_text(const std::string& text, const std::string& file) {
  const Json j = parse_json_text(text, file);
  if (require_string(j, "format", file) != "pambench-trial-result") throw SchemaError(file, "format", "unexpected");
  if (require_int(j, "version", file) != 1) throw SchemaError(file, "version", "unsupported");
  TrialResult r;
  r.trial_ref = require_string(j, "trial_ref", file);
  r.task = require_string(j, "task", file);
  const Json& kind = require(j, "kind", file);
  if (!kind.is_null()) {
    r.kind = kind.is_string() ? parse_task_kind(kind.get<std::string>()) : std::nullopt;
    if (!r.kind) throw SchemaError(file, "kind", "unknown task kind");
  }
  r.trial_id = static_cast<int>(require_int(j, "trial_id", file));
  auto mode = parse_eval_mode(require_string(j, "mode", file));
  if (!mode) throw SchemaError(file, "mode", "unknown mode");
  r.mode = *mode;
  r.model = require_string(j, "model", file);
  r.response = require_string(j, "response", file);
  const Json& caps = require(j, "self_captions", file);
  if (!caps.is_array()) throw SchemaError(file, "self_captions", "expected an array");
  for (const Json& c : caps) {
    if (!c.is_string()) throw SchemaError(file, "self_captions", "expected strings");
    r.self_captions.push_back(c.get<std::string>());
  }
  const Json& ex = require(j, "extracted", file);
  if (!ex.is_null()) {
    r.extracted = ex.is_string() ? Answer::parse(ex.get<std::string>()) : std::nullopt;
    if (!r.extracted) throw SchemaError(file, "extracted", "not a vocabulary word");
  }
  auto gt = Answer::parse(require_string(j, "ground_truth", file));
  if (!gt) throw SchemaError(file, "ground_truth", "not a vocabulary word");
  r.ground_truth = *gt;
  const Json& correct = require(j, "correct", file);
  if (!correct.is_boolean()) throw SchemaError(file, "correct", "expected a boolean");
  r.correct = correct.get<bool>();
  if (r.correct != (r.extracted && *r.extracted == r.ground_truth)) {
    throw SchemaError(file, "correct", "inconsistent with extracted and ground_truth");
  }
  const Json& ec = require(j, "error_class", file);
  if (!ec.is_null()) {
    if (!ec.is_string()) throw SchemaError(file, "error_class", "expected a string or null");
    r.error_class = ec.get<std::string>();
  }
  r.error_message = require_string(j, "error_message", file);
  const Json& lat = require(j, "latency_ms", file);
  if (!lat.is_number()) throw SchemaError(file, "latency_ms", "expected a number");
  r.latency_ms = lat.get<double>();
  const Json& usage = require(j, "usage", file);
  r.usage.prompt_tokens = static_cast<int>(require_int(usage, "prompt_tokens", file));
  r.usage.completion_tokens = static_cast<int>(require_int(usage, "completion_tokens", file));
  r.retries = static_cast<int>(require_int(j, "retries", file));
  return r;
}

TrialResult read_result(const fs::path& p) {
  if (!fs::exists(p)) throw MissingFile("missing " + p.string());
  return result_from_text(read_file_text(p), p.string());
}

// ---------------------------------------------------------------------------
// Running

TrialResult run_trial(const LoadedTrial& trial, ChatClient& model, const EvalConfig& cfg) {
  const Trial& t = trial.trial;
  TrialResult r;
  r.trial_ref = trial_ref(trial.dir);
  r.task = t.task;
  r.kind = t.kind;
  r.trial_id = t.trial_id;
  r.mode = cfg.mode;
  r.model = model.model_name();
  r.ground_truth = t.answer;
  const auto start = std::chrono::steady_clock::now();
  std::vector<RetryRecord> retries;
  try {
    std::optional<std::vector<std::string>> captions;
    if (needs_self_captions(cfg.mode)) {
      captions = caption_frames(trial, model, cfg.retry, cfg.caption_max_tokens, &retries, &r.usage);
      r.self_captions = *captions;
    }
    ChatRequest req{build_prompt(trial, cfg.mode, captions), cfg.answer_max_tokens, cfg.temperature,
                    RequestPurpose::answer};
    const ChatResponse resp = call_with_retry(model, req, cfg.retry, &retries);
    add_usage(r.usage, resp.usage);
    r.response = resp.text;
    r.extracted = extract_answer(resp.text, t.possible_answers, cfg.extractor, &cfg.retry);
    r.correct = r.extracted && *r.extracted == t.answer;
  } catch (const std::exception& e) {
    r.error_class = error_class_of(e);
    r.error_message = e.what();
    r.extracted.reset();
    r.correct = false;
  }
  r.retries = static_cast<int>(retries.size());
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

fs::path result_path(const fs::path& out_dir, const fs::path& trial_dir) {
  return out_dir / trial_dir.parent_path().filename() / (trial_dir.filename().string() + ".json");
}

EvalSummary run_eval(const fs::path& dataset_root, ChatClient& model, const EvalConfig& cfg, const fs::path& out_dir) {
  if (cfg.parallelism < 1) throw InvalidParams("parallelism must be at least 1");
  const auto dirs = list_trial_dirs(dataset_root);
  if (dirs.empty()) throw MissingFile("no trials under " + dataset_root.string());
  std::vector<fs::path> todo;
  for (const auto& d : dirs) {
    const fs::path p = result_path(out_dir, d);
    if (fs::exists(p)) {
      try {
        read_result(p);
        continue;
      } catch (const SchemaError&) {
        // unreadable leftovers are redone
      }
    }
    todo.push_back(d);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      TrialResult r;
      try {
        r = run_trial(read_trial(todo[i]), model, cfg);
      } catch (const std::exception& e) {
        // the trial itself could not be read
        r.trial_ref = trial_ref(todo[i]);
        r.task = todo[i].parent_path().filename().string();
        r.kind = parse_task_kind(r.task);
        r.mode = cfg.mode;
        r.model = model.model_name();
        r.error_class = error_class_of(e);
        r.error_message = e.what();
      }
      fs::create_directories(result_path(out_dir, todo[i]).parent_path());
      write_file_atomic(result_path(out_dir, todo[i]), result_to_text(r));
    }
  };
  const int n_workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism),
                                                               std::max<std::size_t>(todo.size(), 1)));
  std::vector<std::thread> threads;
  for (int w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();

  EvalSummary s;
  s.dataset = fs::absolute(dataset_root).lexically_normal().generic_string();
  s.model = model.model_name();
  s.mode = cfg.mode;
  s.n_trials = dirs.size();
  s.requested = todo.size();
  for (const auto& d : dirs) {
    const TrialResult r = read_result(result_path(out_dir, d));
    s.correct += r.correct;
    if (r.error_class) {
      ++s.errored;
      ++s.error_classes[*r.error_class];
    } else if (!r.extracted) {
      ++s.unscorable;
    }
  }
  write_file_atomic(out_dir / "summary.json", summary_to_text(s));
  return s;
}

std::string summary_to_text(const EvalSummary& s) {
  Json classes = Json::object();
  for (const auto& [k, v] : s.error_classes) classes[k] = v;
  Json j = {{"format", "pambench-eval-summary"},
            {"version", 1},
            {"dataset", s.dataset},
            {"model", s.model},
            {"mode", to_string(s.mode)},
            {"n_trials", s.n_trials},
            {"requested", s.requested},
            {"correct", s.correct},
            {"errored", s.errored},
            {"unscorable", s.unscorable},
            {"accuracy", s.n_trials ? static_cast<double>(s.correct) / static_cast<double>(s.n_trials) : 0.0},
            {"error_classes", std::move(classes)}};
  return dump_json(j);
}

// ---------------------------------------------------------------------------
// Offline models

std::optional<AnswerSet> answers_in_prompt(const MessageSeq& m) {
  const std::string text = flatten_user_text(m);
  constexpr std::string_view kQ = "What is the correct answer to this task? (";
  const auto q = text.rfind(kQ);
  if (q == std::string::npos) return std::nullopt;
  const auto open = q + kQ.size();
  const auto close = text.find(')', open);
  if (close == std::string::npos) return std::nullopt;
  AnswerSet out;
  std::string_view list(text.data() + open, close - open);
  while (!list.empty()) {
    const auto comma = list.find(", ");
    auto a = Answer::parse(list.substr(0, comma));
    if (!a) return std::nullopt;
    out.push_back(*a);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 2);
  }
  return out;
}

std::optional<std::string> ground_truth_caption_for(const Part& image) {
  if (image.type != Part::Type::image || image.source.empty()) return std::nullopt;
  const fs::path src(image.source);
  const std::string name = src.stem().string();
  if (!name.starts_with("epoch")) return std::nullopt;
  try {
    const std::size_t i = std::stoul(name.substr(5));
    const LoadedTrial lt = read_trial(src.parent_path().parent_path());
    if (i >= lt.trial.captions.size()) return std::nullopt;
    return strip_caption_prefix(lt.trial.captions[i]);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

namespace {

// "<task>/trialN/frames/epochI.png": stable wherever the dataset lives.
std::string source_tail(const std::string& source) {
  std::size_t pos = source.size();
  for (int i = 0; i < 4 && pos != std::string::npos && pos > 0; ++i) pos = source.rfind('/', pos - 1);
  return pos == std::string::npos ? source : source.substr(pos + 1);
}

}  // namespace

ChatResponse UniformRandomModel::complete(const ChatRequest& req) {
  std::uint64_t h = label_hash(flatten_user_text(req.messages));
  for (const Turn& t : req.messages.turns) {
    for (const Part& p : t.parts) {
      if (p.type == Part::Type::image) h = mix64(h ^ label_hash(source_tail(p.source)));
    }
  }
  if (req.purpose == RequestPurpose::caption) {
    for (const Part& p : req.messages.turns.at(0).parts) {
      if (auto c = ground_truth_caption_for(p)) return {*c, {}};
    }
    return {"delay frame", {}};
  }
  auto answers = answers_in_prompt(req.messages);
  if (!answers || answers->empty()) return {"I cannot tell.", {}};
  Rng rng(derive_seed(seed_, h));
  return {"The answer is " + to_string((*answers)[rng.index(answers->size())]) + ".", {}};
}

}  // namespace pambench
