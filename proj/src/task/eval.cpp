#include "pambench/errors.hpp"
#include "pambench/task.hpp"

namespace pambench {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Value = std::variant<const SceneObject*, bool, Location, Category, Identity>;

const SceneObject* resolve(const Select& sel, const Scene& scene) {
  if (sel.frame_index < 0 || static_cast<std::size_t>(sel.frame_index) >= scene.frames.size()) {
    throw MissingFrame("Select refers to frame " + std::to_string(sel.frame_index) + " but the scene has " +
                       std::to_string(scene.frames.size()) + " frames");
  }
  const SceneObject* found = nullptr;
  int matches = 0;
  for (const auto& obj : scene.frames[static_cast<std::size_t>(sel.frame_index)].objects) {
    bool hit = std::visit(overloaded{
                              [](NoCue) { return true; },
                              [&](Location l) { return obj.location == l; },
                              [&](Category c) { return obj.stimulus.category == c; },
                          },
                          sel.cue);
    if (hit) {
      found = &obj;
      ++matches;
    }
  }
  if (matches != 1) {
    throw UnresolvedSelect("Select for object " + std::to_string(sel.object_ordinal) + " in frame " +
                           std::to_string(sel.frame_index) + " matches " + std::to_string(matches) +
                           " objects");
  }
  return found;
}

Value attribute(const SceneObject& obj, AttributeKind kind) {
  switch (kind) {
    case AttributeKind::location:
      return obj.location;
    case AttributeKind::category:
      return obj.stimulus.category;
    case AttributeKind::identity:
      break;
  }
  return identity_of(obj.stimulus);
}

bool as_bool(const std::optional<Value>& v) { return std::get<bool>(*v); }

// Post-order evaluation with an explicit work stack and a memo per node. A
// Switch only schedules its condition and then the branch that was taken.
class Evaluator {
 public:
  Evaluator(const TaskGraph& g, const Scene& s) : graph_(g), scene_(s), memo_(g.nodes.size()) {}

  Value run() {
    std::vector<NodeId> stack{graph_.root};
    while (!stack.empty()) {
      NodeId id = stack.back();
      if (memo_[id]) {
        stack.pop_back();
        continue;
      }
      if (auto need = step(id)) {
        stack.push_back(*need);
      } else {
        stack.pop_back();
      }
    }
    return *memo_[graph_.root];
  }

 private:
  // Either computes memo_[id] or returns a dependency that must be evaluated first.
  std::optional<NodeId> step(NodeId id) {
    auto missing = [&](std::initializer_list<NodeId> deps) -> std::optional<NodeId> {
      for (NodeId d : deps) {
        if (!memo_[d]) return d;
      }
      return std::nullopt;
    };
    return std::visit(
        overloaded{
            [&](const Select& s) -> std::optional<NodeId> {
              memo_[id] = resolve(s, scene_);
              return std::nullopt;
            },
            [&](const GetAttr& g) -> std::optional<NodeId> {
              if (auto m = missing({g.select})) return m;
              memo_[id] = attribute(*std::get<const SceneObject*>(*memo_[g.select]), g.kind);
              return std::nullopt;
            },
            [&](const IsSame& c) -> std::optional<NodeId> {
              if (auto m = missing({c.a, c.b})) return m;
              memo_[id] = same(c.kind, c.a, c.b);
              return std::nullopt;
            },
            [&](const NotSame& c) -> std::optional<NodeId> {
              if (auto m = missing({c.a, c.b})) return m;
              memo_[id] = !same(c.kind, c.a, c.b);
              return std::nullopt;
            },
            [&](const And& c) -> std::optional<NodeId> {
              if (auto m = missing({c.a, c.b})) return m;
              memo_[id] = as_bool(memo_[c.a]) && as_bool(memo_[c.b]);
              return std::nullopt;
            },
            [&](const Or& c) -> std::optional<NodeId> {
              if (auto m = missing({c.a, c.b})) return m;
              memo_[id] = as_bool(memo_[c.a]) || as_bool(memo_[c.b]);
              return std::nullopt;
            },
            [&](const Switch& s) -> std::optional<NodeId> {
              if (auto m = missing({s.cond})) return m;
              NodeId taken = as_bool(memo_[s.cond]) ? s.then_branch : s.else_branch;
              if (auto m = missing({taken})) return m;
              memo_[id] = *memo_[taken];
              return std::nullopt;
            },
        },
        graph_.nodes[id]);
  }

  bool same(AttributeKind kind, NodeId a, NodeId b) const {
    const auto* oa = std::get<const SceneObject*>(*memo_[a]);
    const auto* ob = std::get<const SceneObject*>(*memo_[b]);
    return attribute(*oa, kind) == attribute(*ob, kind);
  }

  const TaskGraph& graph_;
  const Scene& scene_;
  std::vector<std::optional<Value>> memo_;
};

}  // namespace

Answer eval_graph(const TaskGraph& graph, const Scene& scene) {
  if (auto report = validate_graph(graph); !report.ok()) {
    throw InvalidGraph("invalid task graph: " + report.to_string());
  }
  Value v = Evaluator(graph, scene).run();
  return std::visit(overloaded{
                        [](const SceneObject*) -> Answer { throw InvalidGraph("root evaluated to an object"); },
                        [](bool b) { return Answer(b); },
                        [](Location l) { return Answer(l); },
                        [](Category c) { return Answer(c); },
                        [](Identity) -> Answer { throw IdentityRoot("root evaluated to an identity value"); },
                    },
                    v);
}

}  // namespace pambench
