#include "pambench/language.hpp"

#include <map>

#include "pambench/errors.hpp"

namespace pambench {

const std::string_view kSelfCaptionPrompt =
    "Please provide a concise caption for the given image, including what the location of each the object in the "
    "images are and what the category of each object is. Each image either is blank (a delay frame) or contains one "
    "or more 3D objects from one of eight categories: benches, boats, cars, chairs, couches, lighting, planes, and "
    "tables. The object is placed in one of four locations: top left, top right, bottom left, or bottom right.";

namespace {

class Renderer {
 public:
  explicit Renderer(const TaskGraph& g) : g_(g) {}

  std::string render(NodeId id) const {
    const Node& n = g_.nodes[id];
    if (const auto* ga = std::get_if<GetAttr>(&n)) return attr(ga->kind, ga->select);
    if (const auto* is = std::get_if<IsSame>(&n)) return attr(is->kind, is->a) + " equals " + attr(is->kind, is->b);
    if (const auto* ns = std::get_if<NotSame>(&n)) {
      return attr(ns->kind, ns->a) + " not equals " + attr(ns->kind, ns->b);
    }
    if (const auto* a = std::get_if<And>(&n)) return render(a->a) + " and " + render(a->b);
    if (const auto* o = std::get_if<Or>(&n)) return render(o->a) + " or " + render(o->b);
    const auto& sw = std::get<Switch>(n);
    return "if " + render(sw.cond) + ", then " + render(sw.then_branch) + "? else " + render(sw.else_branch);
  }

 private:
  std::string attr(AttributeKind k, NodeId select) const {
    return std::string(to_string(k)) + " of object " + std::to_string(std::get<Select>(g_.nodes[select]).object_ordinal);
  }

  const TaskGraph& g_;
};

std::string observe_clause(const Select& s) {
  const std::string frame = " in frame " + std::to_string(s.frame_index + 1);
  if (const auto* c = std::get_if<Category>(&s.cue)) return "observe the " + std::string(to_string(*c)) + frame;
  if (const auto* l = std::get_if<Location>(&s.cue)) {
    return "observe the object at the " + std::string(to_string(*l)) + frame;
  }
  return "observe object " + std::to_string(s.object_ordinal) + frame;
}

}  // namespace

std::string synth_instruction(const TaskGraph& graph, const Scene& scene) {
  if (auto r = validate_graph(graph); !r.ok()) throw InvalidGraph("invalid task graph: " + r.to_string());

  // frame -> selects in that frame, one per ordinal
  std::map<int, std::map<int, const Select*>> by_frame;
  for (const Node& n : graph.nodes) {
    if (const auto* s = std::get_if<Select>(&n)) {
      if (s->frame_index >= static_cast<int>(scene.frames.size())) {
        throw MissingFrame("select refers to frame " + std::to_string(s->frame_index + 1) + " of a " +
                           std::to_string(scene.frames.size()) + "-frame scene");
      }
      by_frame[s->frame_index].emplace(s->object_ordinal, s);
    }
  }

  std::string out;
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    auto it = by_frame.find(static_cast<int>(f));
    if (it == by_frame.end()) {
      out += "delay, ";
      continue;
    }
    for (const auto& [ordinal, sel] : it->second) out += observe_clause(*sel) + ", ";
  }
  out += Renderer(graph).render(graph.root);
  out += "?";
  return out;
}

std::string caption_body(const Frame& frame) {
  if (frame.objects.empty()) return "delay frame";
  std::string out;
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    if (i) out += "; ";
    const auto& o = frame.objects[i];
    out += "A " + std::string(to_string(o.stimulus.category)) + " located at the " + std::string(to_string(o.location));
  }
  return out;
}

std::vector<std::string> synth_ground_truth_captions(const Scene& scene) {
  std::vector<std::string> out;
  out.reserve(scene.frames.size());
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    out.push_back("Frame " + std::to_string(i + 1) + ": " + caption_body(scene.frames[i]));
  }
  return out;
}

std::string strip_caption_prefix(std::string_view caption) {
  if (caption.starts_with("Frame ")) {
    std::size_t i = 6;
    while (i < caption.size() && caption[i] >= '0' && caption[i] <= '9') ++i;
    if (i > 6 && caption.substr(i).starts_with(": ")) return std::string(caption.substr(i + 2));
  }
  return std::string(caption);
}

std::string format_answer_list(const AnswerSet& set) {
  std::string out = "(";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ", ";
    out += to_string(set[i]);
  }
  return out + ")";
}

}  // namespace pambench
