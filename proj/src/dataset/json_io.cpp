#include "pambench/json_io.hpp"

#include "pambench/errors.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace {

template <typename T, typename Parse>
T enum_field(const Json& obj, const std::string& key, const std::string& file, Parse parse) {
  const std::string s = require_string(obj, key, file);
  auto v = parse(s);
  if (!v) throw SchemaError(file, key, "unknown value \"" + s + "\"");
  return *v;
}

NodeId node_ref(const Json& obj, const std::string& key, const std::string& file, std::size_t n_nodes) {
  const auto v = require_int(obj, key, file);
  if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) throw SchemaError(file, key, "node reference out of range");
  return static_cast<NodeId>(v);
}

int int_field(const Json& obj, const std::string& key, const std::string& file) {
  const auto v = require_int(obj, key, file);
  if (v < INT32_MIN || v > INT32_MAX) throw SchemaError(file, key, "out of range");
  return static_cast<int>(v);
}

IntRange range_from_json(const Json& obj, const std::string& key, const std::string& file) {
  const Json& r = require(obj, key, file);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
    throw SchemaError(file, key, "expected [lo, hi]");
  }
  return {r[0].get<int>(), r[1].get<int>()};
}

}  // namespace

const Json& require(const Json& obj, const std::string& key, const std::string& file) {
  if (!obj.is_object()) throw SchemaError(file, key, "parent is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(file, key, "missing");
  return *it;
}

std::string require_string(const Json& obj, const std::string& key, const std::string& file) {
  const Json& v = require(obj, key, file);
  if (!v.is_string()) throw SchemaError(file, key, "expected a string");
  return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, const std::string& key, const std::string& file) {
  const Json& v = require(obj, key, file);
  if (!v.is_number_integer()) throw SchemaError(file, key, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw SchemaError(file, key, "out of range");
  }
  return v.get<std::int64_t>();
}

std::uint64_t require_uint(const Json& obj, const std::string& key, const std::string& file) {
  const Json& v = require(obj, key, file);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw SchemaError(file, key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

Json parse_json_text(const std::string& text, const std::string& file) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(file, "", std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw MissingFile("missing " + p.string());
  return parse_json_text(read_file_text(p), p.string());
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

Json graph_to_json(const TaskGraph& g) {
  Json nodes = Json::array();
  for (const Node& n : g.nodes) {
    Json o;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Select>) {
            o["op"] = "Select";
            o["frame"] = v.frame_index;
            o["ordinal"] = v.object_ordinal;
            if (const auto* l = std::get_if<Location>(&v.cue)) {
              o["cue"] = {{"location", to_string(*l)}};
            } else if (const auto* c = std::get_if<Category>(&v.cue)) {
              o["cue"] = {{"category", to_string(*c)}};
            } else {
              o["cue"] = nullptr;
            }
          } else if constexpr (std::is_same_v<T, GetAttr>) {
            o["op"] = "GetAttr";
            o["attribute"] = to_string(v.kind);
            o["select"] = v.select;
          } else if constexpr (std::is_same_v<T, IsSame> || std::is_same_v<T, NotSame>) {
            o["op"] = std::is_same_v<T, IsSame> ? "IsSame" : "NotSame";
            o["attribute"] = to_string(v.kind);
            o["a"] = v.a;
            o["b"] = v.b;
          } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
            o["op"] = std::is_same_v<T, And> ? "And" : "Or";
            o["a"] = v.a;
            o["b"] = v.b;
          } else {
            o["op"] = "Switch";
            o["cond"] = v.cond;
            o["then"] = v.then_branch;
            o["else"] = v.else_branch;
          }
        },
        n);
    nodes.push_back(std::move(o));
  }
  return {{"root", g.root}, {"nodes", std::move(nodes)}};
}

TaskGraph graph_from_json(const Json& j, const std::string& file) {
  const Json& nodes = require(j, "nodes", file);
  if (!nodes.is_array() || nodes.empty()) throw SchemaError(file, "nodes", "expected a non-empty array");
  const std::size_t n = nodes.size();
  TaskGraph g;
  for (const Json& o : nodes) {
    const std::string op = require_string(o, "op", file);
    if (op == "Select") {
      Select s;
      s.frame_index = int_field(o, "frame", file);
      s.object_ordinal = int_field(o, "ordinal", file);
      const Json& cue = require(o, "cue", file);
      if (cue.is_null()) {
        s.cue = NoCue{};
      } else if (cue.is_object() && cue.size() == 1 && cue.contains("location")) {
        s.cue = enum_field<Location>(cue, "location", file, parse_location);
      } else if (cue.is_object() && cue.size() == 1 && cue.contains("category")) {
        s.cue = enum_field<Category>(cue, "category", file, parse_category);
      } else {
        throw SchemaError(file, "cue", "expected null, {\"location\": ...} or {\"category\": ...}");
      }
      g.add(s);
    } else if (op == "GetAttr") {
      g.add(GetAttr{enum_field<AttributeKind>(o, "attribute", file, parse_attribute_kind),
                    node_ref(o, "select", file, n)});
    } else if (op == "IsSame" || op == "NotSame") {
      auto k = enum_field<AttributeKind>(o, "attribute", file, parse_attribute_kind);
      NodeId a = node_ref(o, "a", file, n), b = node_ref(o, "b", file, n);
      if (op == "IsSame") {
        g.add(IsSame{k, a, b});
      } else {
        g.add(NotSame{k, a, b});
      }
    } else if (op == "And" || op == "Or") {
      NodeId a = node_ref(o, "a", file, n), b = node_ref(o, "b", file, n);
      if (op == "And") {
        g.add(And{a, b});
      } else {
        g.add(Or{a, b});
      }
    } else if (op == "Switch") {
      g.add(Switch{node_ref(o, "cond", file, n), node_ref(o, "then", file, n), node_ref(o, "else", file, n)});
    } else {
      throw SchemaError(file, "op", "unknown operator \"" + op + "\"");
    }
  }
  g.root = node_ref(j, "root", file, n);
  auto report = validate_graph(g);
  if (!report.ok()) throw SchemaError(file, "nodes", "invalid graph: " + report.to_string());
  return g;
}

Json scene_to_json(const Scene& s) {
  Json frames = Json::array();
  for (const Frame& f : s.frames) {
    Json objs = Json::array();
    for (const SceneObject& o : f.objects) {
      Json jo = {{"category", to_string(o.stimulus.category)},
                 {"object", o.stimulus.object_index},
                 {"view", o.stimulus.view_index},
                 {"location", to_string(o.location)}};
      jo["ordinal"] = o.object_ordinal ? Json(*o.object_ordinal) : Json(nullptr);
      objs.push_back(std::move(jo));
    }
    frames.push_back({{"index", f.index}, {"objects", std::move(objs)}});
  }
  return {{"frames", std::move(frames)}};
}

Scene scene_from_json(const Json& j, const std::string& file) {
  const Json& frames = require(j, "frames", file);
  if (!frames.is_array()) throw SchemaError(file, "frames", "expected an array");
  Scene s;
  for (const Json& jf : frames) {
    Frame f;
    f.index = int_field(jf, "index", file);
    const Json& objs = require(jf, "objects", file);
    if (!objs.is_array()) throw SchemaError(file, "objects", "expected an array");
    for (const Json& jo : objs) {
      SceneObject o;
      o.stimulus.category = enum_field<Category>(jo, "category", file, parse_category);
      o.stimulus.object_index = int_field(jo, "object", file);
      o.stimulus.view_index = int_field(jo, "view", file);
      o.location = enum_field<Location>(jo, "location", file, parse_location);
      const Json& ord = require(jo, "ordinal", file);
      if (ord.is_null()) {
        o.object_ordinal = std::nullopt;
      } else {
        o.object_ordinal = int_field(jo, "ordinal", file);
      }
      f.objects.push_back(o);
    }
    s.frames.push_back(std::move(f));
  }
  auto problems = check_scene(s);
  if (!problems.empty()) throw SchemaError(file, "frames", "invalid scene: " + problems.front());
  return s;
}

Json answers_to_json(const AnswerSet& set) {
  Json arr = Json::array();
  for (const Answer& a : set) arr.push_back(to_string(a));
  return arr;
}

AnswerSet answers_from_json(const Json& j, const std::string& file, const std::string& key) {
  if (!j.is_array()) throw SchemaError(file, key, "expected an array");
  AnswerSet out;
  for (const Json& e : j) {
    if (!e.is_string()) throw SchemaError(file, key, "expected answer strings");
    auto a = Answer::parse(e.get<std::string>());
    if (!a) throw SchemaError(file, key, "\"" + e.get<std::string>() + "\" is not a vocabulary word");
    out.push_back(*a);
  }
  return out;
}

Json canvas_to_json(const CanvasConfig& c) {
  return {{"width", c.width},
          {"height", c.height},
          {"background", {c.background.r, c.background.g, c.background.b}},
          {"margin", c.margin},
          {"extent", c.extent}};
}

CanvasConfig canvas_from_json(const Json& j, const std::string& file) {
  CanvasConfig c;
  c.width = int_field(j, "width", file);
  c.height = int_field(j, "height", file);
  c.margin = int_field(j, "margin", file);
  const Json& e = require(j, "extent", file);
  if (!e.is_number()) throw SchemaError(file, "extent", "expected a number");
  c.extent = e.get<double>();
  const Json& bg = require(j, "background", file);
  if (!bg.is_array() || bg.size() != 3) throw SchemaError(file, "background", "expected [r, g, b]");
  for (const Json& v : bg) {
    if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 255) {
      throw SchemaError(file, "background", "channel out of range");
    }
  }
  c.background = {bg[0].get<std::uint8_t>(), bg[1].get<std::uint8_t>(), bg[2].get<std::uint8_t>()};
  try {
    c.validate();
  } catch (const Error& ex) {
    throw SchemaError(file, "canvas", ex.what());
  }
  return c;
}

Json pam_config_to_json(const PamConfig& c) {
  return {{"delay_frames", {c.delay_frames.lo, c.delay_frames.hi}},
          {"attention_objects", {c.attention_objects.lo, c.attention_objects.hi}},
          {"distractors_per_delay", {c.distractors_per_delay.lo, c.distractors_per_delay.hi}},
          {"balance", c.balance}};
}

PamConfig pam_config_from_json(const Json& j, const std::string& file) {
  PamConfig c;
  c.delay_frames = range_from_json(j, "delay_frames", file);
  c.attention_objects = range_from_json(j, "attention_objects", file);
  c.distractors_per_delay = range_from_json(j, "distractors_per_delay", file);
  const Json& b = require(j, "balance", file);
  if (!b.is_boolean()) throw SchemaError(file, "balance", "expected a boolean");
  c.balance = b.get<bool>();
  try {
    c.validate();
  } catch (const Error& ex) {
    throw SchemaError(file, "pam", ex.what());
  }
  return c;
}

}  // namespace pambench
