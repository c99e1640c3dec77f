#include "pambench/trial.hpp"

#include <algorithm>

#include "pambench/errors.hpp"
#include "pambench/language.hpp"

namespace pambench {

Trial make_trial(std::string task, std::optional<TaskKind> kind, int trial_id, Instance instance,
                 AnswerSpacePolicy policy, std::uint64_t seed, std::string pack_digest) {
  Trial t;
  t.task = std::move(task);
  t.kind = kind;
  t.trial_id = trial_id;
  t.instruction = synth_instruction(instance.graph, instance.scene);
  t.answer = eval_graph(instance.graph, instance.scene);
  t.possible_answers = possible_answers(instance.graph, policy);
  t.policy = policy;
  t.captions = synth_ground_truth_captions(instance.scene);
  t.seed = seed;
  t.pack_digest = std::move(pack_digest);
  t.n_frames = static_cast<int>(instance.scene.frames.size());
  t.graph = std::move(instance.graph);
  t.scene = std::move(instance.scene);
  if (std::find(t.possible_answers.begin(), t.possible_answers.end(), t.answer) == t.possible_answers.end()) {
    throw InvalidGraph("answer " + to_string(t.answer) + " outside the answer space");
  }
  return t;
}

}  // namespace pambench
