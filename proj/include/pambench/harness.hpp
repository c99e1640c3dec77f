#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pambench/prompt.hpp"
#include "pambench/rng.hpp"

namespace pambench {

struct ModelEndpoint {
  std::string base_url;     // e.g. "https://api.example.com/v1"
  std::string model;
  std::string api_key_env;  // name of the variable holding the key; empty for none
  int max_tokens = 1024;    // answer requests
  int caption_max_tokens = 1024;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 5;
  double temperature = 0.0;

  void validate() const;  // throws InvalidParams
};

enum class RequestPurpose : std::uint8_t { caption, answer, extract };

struct ChatRequest {
  MessageSeq messages;
  int max_tokens = 1024;
  double temperature = 0.0;
  RequestPurpose purpose = RequestPurpose::answer;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

// Must be safe to call from several threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string model_name() const = 0;
  // Throws EndpointError.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// Chat-completions wire body; key order and number formatting are fixed, so
// equal requests give byte-identical payloads.
std::string request_payload(const ChatRequest& req, const std::string& model);

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ModelEndpoint ep);
  std::string model_name() const override { return ep_.model; }
  ChatResponse complete(const ChatRequest& req) override;
  const ModelEndpoint& endpoint() const noexcept { return ep_; }

 private:
  ModelEndpoint ep_;
  std::string scheme_host_;
  std::string path_prefix_;
};

// Exponential backoff: base * factor^attempt plus up to 25% jitter, at least
// the server's Retry-After.
struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleeping the thread
};

struct RetryRecord {
  int attempt = 0;  // 1-based attempt that failed
  int status = 0;
  std::string error;
  std::chrono::milliseconds delay{0};
};

// Retries only retryable EndpointErrors; the final failure propagates.
ChatResponse call_with_retry(ChatClient& client, const ChatRequest& req, const RetryPolicy& policy,
                             std::vector<RetryRecord>* retries = nullptr);

// One isolated single-image conversation per frame, in frame order.
// Throws EndpointError, EmptyCaption.
std::vector<std::string> caption_frames(const LoadedTrial& trial, ChatClient& client, const RetryPolicy& policy,
                                        int max_tokens = 1024, std::vector<RetryRecord>* retries = nullptr,
                                        TokenUsage* usage = nullptr);

extern const std::string_view kExtractionPrompt;

// Deterministic fallback: the last whole-token occurrence of a possible answer;
// longer answers win over ones they contain.
std::optional<Answer> scan_for_answer(std::string_view response, const AnswerSet& possible);

// Extractor output is accepted only when it names exactly one possible answer.
std::optional<Answer> extract_answer(std::string_view response, const AnswerSet& possible,
                                     ChatClient* extractor = nullptr, const RetryPolicy* policy = nullptr);

struct TrialResult {
  std::string trial_ref;
  std::string task;
  std::optional<TaskKind> kind;
  int trial_id = 0;
  EvalMode mode = EvalMode::base;
  std::string model;
  std::string response;
  std::vector<std::string> self_captions;
  std::optional<Answer> extracted;
  Answer ground_truth;
  bool correct = false;
  std::optional<std::string> error_class;
  std::string error_message;
  double latency_ms = 0;
  TokenUsage usage;
  int retries = 0;
};

std::string result_to_text(const TrialResult& r);
TrialResult result_from_text(const std::string& text, const std::string& file);  // SchemaError
TrialResult read_result(const std::filesystem::path& p);

struct EvalConfig {
  EvalMode mode = EvalMode::base;
  int parallelism = 4;
  ChatClient* extractor = nullptr;
  int answer_max_tokens = 1024;
  int caption_max_tokens = 1024;
  double temperature = 0.0;
  RetryPolicy retry;
};

// Never throws for per-trial failures: they are classified into the result.
TrialResult run_trial(const LoadedTrial& trial, ChatClient& model, const EvalConfig& cfg);

// <out>/<task>/trial{N}.json for a trial directory <root>/<task>/trial{N}.
std::filesystem::path result_path(const std::filesystem::path& out_dir, const std::filesystem::path& trial_dir);

struct EvalSummary {
  std::string dataset;
  std::string model;
  EvalMode mode = EvalMode::base;
  std::size_t n_trials = 0;
  std::size_t requested = 0;  // trials run this time (not resumed)
  std::size_t correct = 0;
  std::size_t errored = 0;
  std::size_t unscorable = 0;  // no answer could be extracted
  std::map<std::string, std::size_t> error_classes;
};

// Runs every trial without a result file, at most `parallelism` at a time,
// then writes summary.json from all result files.
EvalSummary run_eval(const std::filesystem::path& dataset_root, ChatClient& model, const EvalConfig& cfg,
                     const std::filesystem::path& out_dir);

std::string summary_to_text(const EvalSummary& s);

// ---------------------------------------------------------------------------
// Offline models

// Possible answers listed in an answer prompt's closing question.
std::optional<AnswerSet> answers_in_prompt(const MessageSeq& m);

// Caption requests answered with the ground-truth caption body of the frame
// (looked up through the image's source path); empty when unknown.
std::optional<std::string> ground_truth_caption_for(const Part& image);

// Answers uniformly at random among the prompt's possible answers, seeded by
// (seed, prompt) so results do not depend on scheduling. Captions with ground truth.
class UniformRandomModel final : public ChatClient {
 public:
  explicit UniformRandomModel(std::uint64_t seed) : seed_(seed) {}
  std::string model_name() const override { return "mock-random"; }
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::uint64_t seed_;
};

// "mock:random[:seed]" or an http(s) endpoint.
std::unique_ptr<ChatClient> make_client(const ModelEndpoint& ep);

}  // namespace pambench
