#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "instruction_parser.hpp"
#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/language.hpp"

namespace pambench::testing {

// Reads the instruction and the "Frame i: ..." caption lines out of a caption-mode
// prompt and answers by evaluating the parsed instruction; captions from ground truth.
class PerfectReasoner final : public ChatClient {
 public:
  std::string model_name() const override { return "mock-perfect"; }

  ChatResponse complete(const ChatRequest& req) override {
    if (req.purpose == RequestPurpose::caption) {
      for (const Part& p : req.messages.turns.at(0).parts) {
        if (auto c = ground_truth_caption_for(p)) return {*c, {}};
      }
      throw EndpointError("no ground truth for caption request", 400, false);
    }
    const std::string text = flatten_user_text(req.messages, "");
    constexpr std::string_view kInstr = "Task instruction: ";
    const auto a = text.find(kInstr) + kInstr.size();
    const auto b = text.find("\n\n", a);
    const std::string instruction = text.substr(a, b - a);
    std::vector<std::string> bodies;
    for (int i = 1;; ++i) {
      const std::string tag = "Frame " + std::to_string(i) + ": ";
      const auto p = text.find(tag);
      if (p == std::string::npos) break;
      const auto start = p + tag.size();
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      // SC_I runs a frame caption straight into the next image placeholder
      auto next = text.find("Frame " + std::to_string(i + 1) + ": ", start);
      if (next != std::string::npos && next < end) end = next;
      bodies.push_back(text.substr(start, end - start));
    }
    const Answer ans = reason_from_text(instruction, bodies);
    return {"Reasoning over the captions, the answer is " + to_string(ans) + ".", {}};
  }
};

// Records every payload it is sent, answers with a fixed text.
class RecordingModel final : public ChatClient {
 public:
  explicit RecordingModel(ChatClient& inner) : inner_(inner) {}
  std::string model_name() const override { return inner_.model_name(); }
  ChatResponse complete(const ChatRequest& req) override {
    {
      std::lock_guard lock(mu_);
      payloads.push_back({req.purpose, request_payload(req, "recorded")});
    }
    return inner_.complete(req);
  }
  std::vector<std::pair<RequestPurpose, std::string>> payloads;

 private:
  ChatClient& inner_;
  std::mutex mu_;
};

// Fails with a retryable status for the first `failures` calls.
class FlakyModel final : public ChatClient {
 public:
  FlakyModel(int failures, int status, std::string reply) : failures_(failures), status_(status), reply_(reply) {}
  std::string model_name() const override { return "mock-flaky"; }
  ChatResponse complete(const ChatRequest&) override {
    ++calls;
    if (calls <= failures_) {
      throw EndpointError("HTTP " + std::to_string(status_), status_, status_ == 429 || status_ >= 500);
    }
    return {reply_, {3, 4}};
  }
  std::atomic<int> calls{0};

 private:
  int failures_;
  int status_;
  std::string reply_;
};

// Always says the same thing; counts calls.
class FixedModel final : public ChatClient {
 public:
  explicit FixedModel(std::string reply) : reply_(std::move(reply)) {}
  std::string model_name() const override { return "mock-fixed"; }
  ChatResponse complete(const ChatRequest&) override {
    ++calls;
    return {reply_, {}};
  }
  std::atomic<int> calls{0};

 private:
  std::string reply_;
};

}  // namespace pambench::testing
