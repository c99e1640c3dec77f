#pragma once

// Task DSL: stimulus vocabulary, scenes, operator graphs and their evaluation.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pambench {

enum class Category : std::uint8_t { benches, boats, cars, chairs, couches, lighting, planes, tables };

// Enumerator order matches the canonical answer vocabulary order.
enum class Location : std::uint8_t { bottom_right, bottom_left, top_left, top_right };

enum class AttributeKind : std::uint8_t { location, category, identity };

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::benches, Category::boats,    Category::cars,   Category::chairs,
    Category::couches, Category::lighting, Category::planes, Category::tables};

inline constexpr std::array<Location, 4> kAllLocations = {
    Location::bottom_right, Location::bottom_left, Location::top_left, Location::top_right};

inline constexpr int kObjectsPerCategory = 8;

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Location l) noexcept;
std::string_view to_string(AttributeKind k) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;
std::optional<Location> parse_location(std::string_view s) noexcept;
std::optional<AttributeKind> parse_attribute_kind(std::string_view s) noexcept;

inline constexpr bool is_right(Location l) noexcept {
  return l == Location::top_right || l == Location::bottom_right;
}
inline constexpr bool is_bottom(Location l) noexcept {
  return l == Location::bottom_left || l == Location::bottom_right;
}

struct StimulusId {
  Category category = Category::benches;
  int object_index = 0;
  int view_index = 0;

  friend auto operator<=>(const StimulusId&, const StimulusId&) = default;
};

// identity ignores the view: the same object seen from another angle is the same object.
struct Identity {
  Category category = Category::benches;
  int object_index = 0;

  friend auto operator<=>(const Identity&, const Identity&) = default;
};

inline Identity identity_of(const StimulusId& s) noexcept { return {s.category, s.object_index}; }

struct SceneObject {
  StimulusId stimulus;
  Location location = Location::top_left;
  std::optional<int> object_ordinal;  // absent for distractors

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Frame {
  int index = 0;
  std::vector<SceneObject> objects;  // empty: blank delay frame

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Scene {
  std::vector<Frame> frames;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Builds a scene of `n` empty frames with contiguous indices.
Scene make_blank_scene(int n);

// Returns human-readable violations of the Scene/Frame invariants (empty when valid).
std::vector<std::string> check_scene(const Scene& scene);

// ---------------------------------------------------------------------------
// Cues and graph nodes

struct NoCue {
  friend bool operator==(NoCue, NoCue) = default;
};
using Cue = std::variant<NoCue, Location, Category>;

using NodeId = std::uint32_t;

struct Select {
  int frame_index = 0;
  Cue cue = NoCue{};
  int object_ordinal = 1;
  friend bool operator==(const Select&, const Select&) = default;
};
struct GetAttr {
  AttributeKind kind = AttributeKind::location;
  NodeId select = 0;
  friend bool operator==(const GetAttr&, const GetAttr&) = default;
};
struct IsSame {
  AttributeKind kind = AttributeKind::location;
  NodeId a = 0, b = 0;
  friend bool operator==(const IsSame&, const IsSame&) = default;
};
struct NotSame {
  AttributeKind kind = AttributeKind::location;
  NodeId a = 0, b = 0;
  friend bool operator==(const NotSame&, const NotSame&) = default;
};
struct And {
  NodeId a = 0, b = 0;
  friend bool operator==(const And&, const And&) = default;
};
struct Or {
  NodeId a = 0, b = 0;
  friend bool operator==(const Or&, const Or&) = default;
};
struct Switch {
  NodeId cond = 0, then_branch = 0, else_branch = 0;
  friend bool operator==(const Switch&, const Switch&) = default;
};

using Node = std::variant<Select, GetAttr, IsSame, NotSame, And, Or, Switch>;

struct TaskGraph {
  std::vector<Node> nodes;
  NodeId root = 0;

  NodeId add(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<NodeId>(nodes.size() - 1);
  }

  friend bool operator==(const TaskGraph&, const TaskGraph&) = default;
};

// ---------------------------------------------------------------------------
// Result types

enum class ValueType : std::uint8_t { object = 1, boolean = 2, location = 4, category = 8, identity = 16 };

// Set of result types a node can produce. Every node has exactly one type except
// Switch, whose type is the union of its branches.
class TypeSet {
 public:
  constexpr TypeSet() = default;
  constexpr TypeSet(ValueType t) : bits_(static_cast<std::uint8_t>(t)) {}  // NOLINT(implicit)

  constexpr bool contains(ValueType t) const noexcept { return bits_ & static_cast<std::uint8_t>(t); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool is_only(ValueType t) const noexcept { return bits_ == static_cast<std::uint8_t>(t); }
  constexpr TypeSet operator|(TypeSet o) const noexcept { return from_bits(bits_ | o.bits_); }
  constexpr bool operator==(const TypeSet&) const = default;

 private:
  static constexpr TypeSet from_bits(int b) {
    TypeSet t;
    t.bits_ = static_cast<std::uint8_t>(b);
    return t;
  }
  std::uint8_t bits_ = 0;
};

struct Violation {
  std::optional<NodeId> node;
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_graph(const TaskGraph& graph);

// Result type of every node; only meaningful for graphs that validate.
std::vector<TypeSet> infer_types(const TaskGraph& graph);

// ---------------------------------------------------------------------------
// Answers

class Answer {
 public:
  using Value = std::variant<bool, Location, Category>;

  Answer() = default;
  Answer(bool b) : value_(b) {}          // NOLINT(implicit)
  Answer(Location l) : value_(l) {}      // NOLINT(implicit)
  Answer(Category c) : value_(c) {}      // NOLINT(implicit)

  const Value& value() const noexcept { return value_; }

  // Position in the canonical 14-word vocabulary.
  int vocab_index() const noexcept;
  static Answer from_vocab_index(int i);
  static std::optional<Answer> parse(std::string_view s) noexcept;

  friend bool operator==(const Answer&, const Answer&) = default;
  friend auto operator<=>(const Answer& a, const Answer& b) noexcept {
    return a.vocab_index() <=> b.vocab_index();
  }

 private:
  Value value_ = false;
};

std::string to_string(const Answer& a);

inline constexpr int kVocabularySize = 14;

// Ordered by vocab_index, no duplicates.
using AnswerSet = std::vector<Answer>;

AnswerSet full_vocabulary();

// The answer space of an answer's type (2, 4 or 8 entries). Used for foreign
// trials where only the final answer is known.
AnswerSet answer_type_space(const Answer& a);

enum class AnswerSpacePolicy : std::uint8_t { exact, full_vocabulary };

std::string_view to_string(AnswerSpacePolicy p) noexcept;
std::optional<AnswerSpacePolicy> parse_policy(std::string_view s) noexcept;

// ---------------------------------------------------------------------------
// Operations

// Evaluates the graph over the scene. Switch evaluates only the taken branch.
// Throws InvalidGraph, MissingFrame, UnresolvedSelect, IdentityRoot.
Answer eval_graph(const TaskGraph& graph, const Scene& scene);

// Independent naive recursive interpreter used as a test oracle for eval_graph.
Answer brute_force_answer(const TaskGraph& graph, const Scene& scene);

// Throws IdentityRoot when the root can produce an identity value.
AnswerSet possible_answers(const TaskGraph& graph, AnswerSpacePolicy policy);

double chance_level(const TaskGraph& graph, AnswerSpacePolicy policy);

// Whole-percent display value, rounded half up (12.5 -> 13, 7.14 -> 7).
int chance_percent(double chance) noexcept;

}  // namespace pambench
