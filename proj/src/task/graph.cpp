#include <algorithm>
#include <map>

#include "pambench/task.hpp"

namespace pambench {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<NodeId> children(const Node& n) {
  return std::visit(overloaded{
                        [](const Select&) { return std::vector<NodeId>{}; },
                        [](const GetAttr& g) { return std::vector<NodeId>{g.select}; },
                        [](const IsSame& c) { return std::vector<NodeId>{c.a, c.b}; },
                        [](const NotSame& c) { return std::vector<NodeId>{c.a, c.b}; },
                        [](const And& c) { return std::vector<NodeId>{c.a, c.b}; },
                        [](const Or& c) { return std::vector<NodeId>{c.a, c.b}; },
                        [](const Switch& s) {
                          return std::vector<NodeId>{s.cond, s.then_branch, s.else_branch};
                        },
                    },
                    n);
}

ValueType attribute_type(AttributeKind k) {
  switch (k) {
    case AttributeKind::location:
      return ValueType::location;
    case AttributeKind::category:
      return ValueType::category;
    case AttributeKind::identity:
      break;
  }
  return ValueType::identity;
}

// Returns a node on a cycle, if any. Iterative three-colour DFS over every node.
std::optional<NodeId> find_cycle(const TaskGraph& g) {
  enum : std::uint8_t { white, grey, black };
  std::vector<std::uint8_t> colour(g.nodes.size(), white);
  for (NodeId start = 0; start < g.nodes.size(); ++start) {
    if (colour[start] != white) continue;
    std::vector<std::pair<NodeId, std::size_t>> stack{{start, 0}};
    colour[start] = grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto kids = children(g.nodes[node]);
      if (next < kids.size()) {
        NodeId k = kids[next++];
        if (colour[k] == grey) return k;
        if (colour[k] == white) {
          colour[k] = grey;
          stack.emplace_back(k, 0);
        }
      } else {
        colour[node] = black;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<TypeSet> infer_types(const TaskGraph& graph) {
  std::vector<TypeSet> types(graph.nodes.size());
  std::vector<std::uint8_t> state(graph.nodes.size(), 0);  // 0 todo, 1 active, 2 done

  auto type_of = [&](NodeId id) -> TypeSet { return id < types.size() ? types[id] : TypeSet{}; };

  for (NodeId start = 0; start < graph.nodes.size(); ++start) {
    if (state[start]) continue;
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
      NodeId id = stack.back();
      if (state[id] == 2) {
        stack.pop_back();
        continue;
      }
      bool pending = false;
      if (state[id] == 0) {
        state[id] = 1;
        for (NodeId k : children(graph.nodes[id])) {
          if (k < graph.nodes.size() && state[k] == 0) {
            stack.push_back(k);
            pending = true;
          }
        }
      }
      if (pending) continue;
      const Node& n = graph.nodes[id];
      types[id] = std::visit(overloaded{
                                 [](const Select&) { return TypeSet(ValueType::object); },
                                 [](const GetAttr& g) { return TypeSet(attribute_type(g.kind)); },
                                 [](const IsSame&) { return TypeSet(ValueType::boolean); },
                                 [](const NotSame&) { return TypeSet(ValueType::boolean); },
                                 [](const And&) { return TypeSet(ValueType::boolean); },
                                 [](const Or&) { return TypeSet(ValueType::boolean); },
                                 [&](const Switch& s) { return type_of(s.then_branch) | type_of(s.else_branch); },
                             },
                             n);
      state[id] = 2;
      stack.pop_back();
    }
  }
  return types;
}

ValidationReport validate_graph(const TaskGraph& graph) {
  ValidationReport report;
  auto add = [&](std::optional<NodeId> node, std::string reason) {
    report.violations.push_back({node, std::move(reason)});
  };

  if (graph.nodes.empty()) {
    add(std::nullopt, "graph has no nodes");
    return report;
  }
  if (graph.root >= graph.nodes.size()) {
    add(std::nullopt, "root reference out of range");
    return report;
  }
  bool dangling = false;
  for (NodeId id = 0; id < graph.nodes.size(); ++id) {
    for (NodeId k : children(graph.nodes[id])) {
      if (k >= graph.nodes.size()) {
        add(id, "reference to missing node " + std::to_string(k));
        dangling = true;
      }
    }
  }
  if (dangling) return report;
  if (auto c = find_cycle(graph)) {
    add(*c, "graph contains a cycle");
    return report;
  }

  const auto types = infer_types(graph);
  auto is_select = [&](NodeId id) { return std::holds_alternative<Select>(graph.nodes[id]); };
  auto check_select_operand = [&](NodeId owner, NodeId operand, const char* op) {
    if (!is_select(operand)) add(owner, std::string(op) + " operand must be a Select");
  };
  auto check_bool_operand = [&](NodeId owner, NodeId operand, const char* op) {
    if (!types[operand].is_only(ValueType::boolean)) add(owner, std::string(op) + " has a non-boolean operand");
  };

  std::map<int, NodeId> ordinals;
  for (NodeId id = 0; id < graph.nodes.size(); ++id) {
    std::visit(overloaded{
                   [&](const Select& s) {
                     if (s.frame_index < 0) add(id, "negative frame index");
                     if (s.object_ordinal < 1) add(id, "object ordinal must be >= 1");
                     if (auto [it, fresh] = ordinals.emplace(s.object_ordinal, id); !fresh) {
                       add(id, "duplicate object ordinal " + std::to_string(s.object_ordinal));
                     }
                   },
                   [&](const GetAttr& g) { check_select_operand(id, g.select, "GetAttr"); },
                   [&](const IsSame& c) {
                     check_select_operand(id, c.a, "IsSame");
                     check_select_operand(id, c.b, "IsSame");
                   },
                   [&](const NotSame& c) {
                     check_select_operand(id, c.a, "NotSame");
                     check_select_operand(id, c.b, "NotSame");
                   },
                   [&](const And& c) {
                     check_bool_operand(id, c.a, "And");
                     check_bool_operand(id, c.b, "And");
                   },
                   [&](const Or& c) {
                     check_bool_operand(id, c.a, "Or");
                     check_bool_operand(id, c.b, "Or");
                   },
                   [&](const Switch& s) {
                     if (!types[s.cond].is_only(ValueType::boolean)) add(id, "non-boolean condition");
                     if (is_select(s.then_branch) || is_select(s.else_branch)) {
                       add(id, "Switch branch must not be a Select");
                     }
                   },
               },
               graph.nodes[id]);
  }

  if (is_select(graph.root)) {
    add(graph.root, "root must produce an Answer");
  } else if (types[graph.root].contains(ValueType::identity)) {
    add(graph.root, "identity-typed root cannot produce an Answer");
  }
  return report;
}

}  // namespace pambench
