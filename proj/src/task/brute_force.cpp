// Reference interpreter. Deliberately naive and self-contained: values are
// tagged strings, selects are resolved by linear scans, and nothing here calls
// into eval.cpp or graph.cpp.

#include <string>

#include "pambench/errors.hpp"
#include "pambench/task.hpp"

namespace pambench {
namespace {

struct Tagged {
  char tag;           // 'o' object, 'b' bool, 'l' location, 'c' category, 'i' identity
  std::string text;   // attribute rendering, "true"/"false", or "frame:slot" for objects
};

class Naive {
 public:
  Naive(const TaskGraph& g, const Scene& s) : g_(g), s_(s) {}

  Tagged eval(NodeId id, int depth) {
    if (depth > static_cast<int>(g_.nodes.size()) + 1) throw InvalidGraph("cycle detected");
    if (id >= g_.nodes.size()) throw InvalidGraph("dangling node reference");
    const Node& n = g_.nodes[id];

    if (const auto* sel = std::get_if<Select>(&n)) return pick(*sel);
    if (const auto* ga = std::get_if<GetAttr>(&n)) {
      Tagged o = eval(ga->select, depth + 1);
      if (o.tag != 'o') throw InvalidGraph("GetAttr operand is not an object");
      return attr(o, ga->kind);
    }
    if (const auto* is = std::get_if<IsSame>(&n)) return compare(is->kind, is->a, is->b, depth, true);
    if (const auto* ns = std::get_if<NotSame>(&n)) return compare(ns->kind, ns->a, ns->b, depth, false);
    if (const auto* a = std::get_if<And>(&n)) {
      bool l = truth(eval(a->a, depth + 1));
      bool r = truth(eval(a->b, depth + 1));
      return boolean(l && r);
    }
    if (const auto* o = std::get_if<Or>(&n)) {
      bool l = truth(eval(o->a, depth + 1));
      bool r = truth(eval(o->b, depth + 1));
      return boolean(l || r);
    }
    const auto& sw = std::get<Switch>(n);
    if (truth(eval(sw.cond, depth + 1))) return eval(sw.then_branch, depth + 1);
    return eval(sw.else_branch, depth + 1);
  }

 private:
  static Tagged boolean(bool v) { return {'b', v ? "true" : "false"}; }

  static bool truth(const Tagged& t) {
    if (t.tag != 'b') throw InvalidGraph("expected a boolean operand");
    return t.text == "true";
  }

  Tagged pick(const Select& sel) {
    int nframes = static_cast<int>(s_.frames.size());
    if (sel.frame_index < 0 || sel.frame_index >= nframes) throw MissingFrame("frame out of range");
    const Frame& f = s_.frames[static_cast<std::size_t>(sel.frame_index)];
    int count = 0;
    int slot = -1;
    for (int i = 0; i < static_cast<int>(f.objects.size()); ++i) {
      const SceneObject& o = f.objects[static_cast<std::size_t>(i)];
      bool ok = true;
      if (sel.cue.index() == 1) ok = o.location == std::get<1>(sel.cue);
      if (sel.cue.index() == 2) ok = o.stimulus.category == std::get<2>(sel.cue);
      if (ok) {
        ++count;
        slot = i;
      }
    }
    if (count != 1) throw UnresolvedSelect("select is ambiguous or empty");
    return {'o', std::to_string(sel.frame_index) + ":" + std::to_string(slot)};
  }

  const SceneObject& object(const Tagged& t) const {
    auto colon = t.text.find(':');
    int frame = std::stoi(t.text.substr(0, colon));
    int slot = std::stoi(t.text.substr(colon + 1));
    return s_.frames[static_cast<std::size_t>(frame)].objects[static_cast<std::size_t>(slot)];
  }

  Tagged attr(const Tagged& obj, AttributeKind k) const {
    const SceneObject& o = object(obj);
    if (k == AttributeKind::location) return {'l', std::string(to_string(o.location))};
    if (k == AttributeKind::category) return {'c', std::string(to_string(o.stimulus.category))};
    return {'i', std::string(to_string(o.stimulus.category)) + "#" + std::to_string(o.stimulus.object_index)};
  }

  Tagged compare(AttributeKind k, NodeId a, NodeId b, int depth, bool want_equal) {
    Tagged oa = eval(a, depth + 1);
    Tagged ob = eval(b, depth + 1);
    if (oa.tag != 'o' || ob.tag != 'o') throw InvalidGraph("comparison operand is not an object");
    bool equal = attr(oa, k).text == attr(ob, k).text;
    return boolean(want_equal ? equal : !equal);
  }

  const TaskGraph& g_;
  const Scene& s_;
};

}  // namespace

Answer brute_force_answer(const TaskGraph& graph, const Scene& scene) {
  if (graph.root >= graph.nodes.size()) throw InvalidGraph("root out of range");
  if (std::holds_alternative<Select>(graph.nodes[graph.root])) throw InvalidGraph("root is a Select");
  Tagged t = Naive(graph, scene).eval(graph.root, 0);
  if (t.tag == 'i') throw IdentityRoot("identity value at root");
  auto parsed = Answer::parse(t.text);
  if (!parsed) throw InvalidGraph("root produced a non-answer value");
  return *parsed;
}

}  // namespace pambench
