#include <cmath>

#include "pambench/errors.hpp"
#include "pambench/task.hpp"

namespace pambench {

AnswerSet possible_answers(const TaskGraph& graph, AnswerSpacePolicy policy) {
  if (auto report = validate_graph(graph); !report.ok()) {
    // An identity root is reported with its own error class.
    const auto types = graph.root < graph.nodes.size() ? infer_types(graph) : std::vector<TypeSet>{};
    if (!types.empty() && types[graph.root].contains(ValueType::identity)) {
      throw IdentityRoot("root can produce an identity value, which is not an answer");
    }
    throw InvalidGraph("invalid task graph: " + report.to_string());
  }
  if (policy == AnswerSpacePolicy::full_vocabulary) return full_vocabulary();

  const TypeSet root = infer_types(graph)[graph.root];
  AnswerSet out;
  if (root.contains(ValueType::boolean)) {
    out.emplace_back(true);
    out.emplace_back(false);
  }
  if (root.contains(ValueType::location)) {
    for (auto l : kAllLocations) out.emplace_back(l);
  }
  if (root.contains(ValueType::category)) {
    for (auto c : kAllCategories) out.emplace_back(c);
  }
  return out;
}

double chance_level(const TaskGraph& graph, AnswerSpacePolicy policy) {
  return 1.0 / static_cast<double>(possible_answers(graph, policy).size());
}

int chance_percent(double chance) noexcept { return static_cast<int>(std::floor(chance * 100.0 + 0.5)); }

}  // namespace pambench
