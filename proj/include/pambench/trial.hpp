#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pambench/taskgen.hpp"

namespace pambench {

struct Trial {
  std::string task;  // directory label: a kind name or "autotask-<preset>"
  std::optional<TaskKind> kind;
  int trial_id = 0;
  std::string instruction;
  Answer answer;
  AnswerSet possible_answers;
  AnswerSpacePolicy policy = AnswerSpacePolicy::exact;
  std::optional<TaskGraph> graph;  // absent for reduced (foreign) trials
  std::optional<Scene> scene;
  std::vector<std::string> captions;  // "Frame {i}: ..." ground truth; empty when unknown
  std::uint64_t seed = 0;
  std::string pack_digest;
  int n_frames = 0;

  bool full() const noexcept { return graph.has_value() && scene.has_value(); }
  friend bool operator==(const Trial&, const Trial&) = default;
};

// Derives instruction, answer, answer space and captions from a generated instance.
Trial make_trial(std::string task, std::optional<TaskKind> kind, int trial_id, Instance instance,
                 AnswerSpacePolicy policy, std::uint64_t seed, std::string pack_digest);

// A trial as found on disk, with its frame images in frame order.
struct LoadedTrial {
  Trial trial;
  std::filesystem::path dir;
  std::vector<std::filesystem::path> frames;
};

}  // namespace pambench
