#include "instruction_parser.hpp"

#include <map>
#include <stdexcept>

namespace pambench::testing {
namespace {

[[noreturn]] void fail(const std::string& why, std::string_view at) {
  throw std::runtime_error("instruction parse error: " + why + " at \"" + std::string(at.substr(0, 60)) + "\"");
}

bool eat(std::string_view& s, std::string_view prefix) {
  if (!s.starts_with(prefix)) return false;
  s.remove_prefix(prefix.size());
  return true;
}

int read_int(std::string_view& s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i == 0) fail("expected a number", s);
  int v = std::stoi(std::string(s.substr(0, i)));
  s.remove_prefix(i);
  return v;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  template <typename F>
  auto read_enum(F parse, std::string_view terminator) {
    const auto end = s_.find(terminator);
    if (end == std::string_view::npos) fail("unterminated cue", s_);
    auto v = parse(s_.substr(0, end));
    if (!v) fail("unknown cue word", s_);
    s_.remove_prefix(end);
    return *v;
  }

  ParsedInstruction run() {
    // timeline: `pos` counts frames consumed so far
    int pos = 0;
    int next_ordinal = 1;
    while (true) {
      if (eat(s_, "delay, ")) {
        ++pos;
        continue;
      }
      if (!eat(s_, "observe ")) break;
      Select sel;
      if (eat(s_, "object ")) {
        sel.object_ordinal = read_int(s_);
      } else if (eat(s_, "the object at the ")) {
        sel.cue = read_enum(parse_location, " in frame ");
        sel.object_ordinal = next_ordinal;
      } else if (eat(s_, "the ")) {
        sel.cue = read_enum(parse_category, " in frame ");
        sel.object_ordinal = next_ordinal;
      } else {
        fail("bad observe clause", s_);
      }
      if (!eat(s_, " in frame ")) fail("expected frame", s_);
      const int f = read_int(s_) - 1;
      if (f != pos && f != pos - 1) fail("frame does not follow the timeline", s_);
      if (!eat(s_, ", ")) fail("expected clause separator", s_);
      sel.frame_index = f;
      pos = f + 1;
      next_ordinal = sel.object_ordinal + 1;
      selects_[sel.object_ordinal] = out_.graph.add(sel);
    }
    out_.n_frames = pos;
    out_.graph.root = value();
    if (s_ != "?") fail("expected final '?'", s_);
    return std::move(out_);
  }

 private:
  NodeId value() {
    if (eat(s_, "if ")) {
      NodeId c = boolean_expr(", then ");
      if (!eat(s_, ", then ")) fail("expected ', then '", s_);
      NodeId t = value();
      if (!eat(s_, "? else ")) fail("expected '? else '", s_);
      NodeId e = value();
      return out_.graph.add(Switch{c, t, e});
    }
    return boolean_expr("?");
  }

  // Flat left-deep chain of comparisons; a lone attribute is a GetAttr.
  NodeId boolean_expr(std::string_view stop) {
    const auto end = s_.find(stop);
    if (end == std::string_view::npos) fail("unterminated expression", s_);
    std::string_view expr = s_.substr(0, end);
    s_.remove_prefix(end);

    std::optional<NodeId> acc;
    char pending = 0;
    while (true) {
      const auto a = expr.find(" and ");
      const auto o = expr.find(" or ");
      const auto cut = std::min(a, o);
      std::string_view term = expr.substr(0, cut);
      NodeId n = term_node(term);
      if (!acc) {
        acc = n;
      } else {
        acc = pending == '&' ? out_.graph.add(And{*acc, n}) : out_.graph.add(Or{*acc, n});
      }
      if (cut == std::string_view::npos) break;
      pending = cut == a ? '&' : '|';
      expr.remove_prefix(cut + (cut == a ? 5 : 4));
    }
    return *acc;
  }

  std::pair<AttributeKind, NodeId> attr(std::string_view& t) {
    const auto sp = t.find(" of object ");
    if (sp == std::string_view::npos) fail("expected attribute", t);
    auto kind = parse_attribute_kind(t.substr(0, sp));
    if (!kind) fail("unknown attribute", t);
    t.remove_prefix(sp + 11);
    const int k = read_int(t);
    auto it = selects_.find(k);
    if (it == selects_.end()) fail("unknown object " + std::to_string(k), t);
    return {*kind, it->second};
  }

  NodeId term_node(std::string_view t) {
    auto [k1, a] = attr(t);
    if (t.empty()) return out_.graph.add(GetAttr{k1, a});
    bool negate = false;
    if (eat(t, " not equals ")) {
      negate = true;
    } else if (!eat(t, " equals ")) {
      fail("expected comparison", t);
    }
    auto [k2, b] = attr(t);
    if (k1 != k2 || !t.empty()) fail("malformed comparison", t);
    return negate ? out_.graph.add(NotSame{k1, a, b}) : out_.graph.add(IsSame{k1, a, b});
  }

  std::string_view s_;
  ParsedInstruction out_;
  std::map<int, NodeId> selects_;
};

}  // namespace

ParsedInstruction parse_instruction(std::string_view text) { return Parser(text).run(); }

Scene scene_from_captions(const std::vector<std::string>& bodies) {
  Scene s = make_blank_scene(static_cast<int>(bodies.size()));
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    std::string_view b = bodies[i];
    if (b == "delay frame") continue;
    while (!b.empty()) {
      const auto end = b.find("; ");
      std::string_view obj = b.substr(0, end);
      if (!eat(obj, "A ")) fail("caption object", obj);
      const auto mid = obj.find(" located at the ");
      if (mid == std::string_view::npos) fail("caption object", obj);
      auto cat = parse_category(obj.substr(0, mid));
      auto loc = parse_location(obj.substr(mid + 16));
      if (!cat || !loc) fail("caption words", obj);
      s.frames[i].objects.push_back(SceneObject{StimulusId{*cat, 0, 0}, *loc, std::nullopt});
      if (end == std::string_view::npos) break;
      b.remove_prefix(end + 2);
    }
  }
  return s;
}

Answer reason_from_text(std::string_view instruction, const std::vector<std::string>& caption_bodies) {
  ParsedInstruction p = parse_instruction(instruction);
  return eval_graph(p.graph, scene_from_captions(caption_bodies));
}

}  // namespace pambench::testing
