#include "pambench/task.hpp"

#include <algorithm>
#include <sstream>

#include "pambench/errors.hpp"

namespace pambench {
namespace {

constexpr std::array<std::string_view, 8> kCategoryNames = {
    "benches", "boats", "cars", "chairs", "couches", "lighting", "planes", "tables"};
constexpr std::array<std::string_view, 4> kLocationNames = {"bottom right", "bottom left", "top left",
                                                            "top right"};
constexpr std::array<std::string_view, 3> kAttributeNames = {"location", "category", "identity"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Location l) noexcept { return kLocationNames[static_cast<std::size_t>(l)]; }
std::string_view to_string(AttributeKind k) noexcept {
  return kAttributeNames[static_cast<std::size_t>(k)];
}

std::optional<Category> parse_category(std::string_view s) noexcept {
  return lookup<Category>(kCategoryNames, s);
}
std::optional<Location> parse_location(std::string_view s) noexcept {
  return lookup<Location>(kLocationNames, s);
}
std::optional<AttributeKind> parse_attribute_kind(std::string_view s) noexcept {
  return lookup<AttributeKind>(kAttributeNames, s);
}

std::string_view to_string(AnswerSpacePolicy p) noexcept {
  return p == AnswerSpacePolicy::exact ? "exact" : "full_vocabulary";
}

std::optional<AnswerSpacePolicy> parse_policy(std::string_view s) noexcept {
  if (s == "exact") return AnswerSpacePolicy::exact;
  if (s == "full_vocabulary") return AnswerSpacePolicy::full_vocabulary;
  return std::nullopt;
}

// Vocabulary layout: 0 true, 1 false, 2..5 locations, 6..13 categories.
int Answer::vocab_index() const noexcept {
  if (const auto* b = std::get_if<bool>(&value_)) return *b ? 0 : 1;
  if (const auto* l = std::get_if<Location>(&value_)) return 2 + static_cast<int>(*l);
  return 6 + static_cast<int>(std::get<Category>(value_));
}

Answer Answer::from_vocab_index(int i) {
  if (i == 0) return Answer(true);
  if (i == 1) return Answer(false);
  if (i >= 2 && i < 6) return Answer(static_cast<Location>(i - 2));
  if (i >= 6 && i < kVocabularySize) return Answer(static_cast<Category>(i - 6));
  throw Error("answer vocabulary index out of range: " + std::to_string(i));
}

std::optional<Answer> Answer::parse(std::string_view s) noexcept {
  if (s == "true") return Answer(true);
  if (s == "false") return Answer(false);
  if (auto l = parse_location(s)) return Answer(*l);
  if (auto c = parse_category(s)) return Answer(*c);
  return std::nullopt;
}

std::string to_string(const Answer& a) {
  if (const auto* b = std::get_if<bool>(&a.value())) return *b ? "true" : "false";
  if (const auto* l = std::get_if<Location>(&a.value())) return std::string(to_string(*l));
  return std::string(to_string(std::get<Category>(a.value())));
}

AnswerSet full_vocabulary() {
  AnswerSet out;
  for (int i = 0; i < kVocabularySize; ++i) out.push_back(Answer::from_vocab_index(i));
  return out;
}

AnswerSet answer_type_space(const Answer& a) {
  AnswerSet out;
  if (std::holds_alternative<bool>(a.value())) {
    out = {Answer(true), Answer(false)};
  } else if (std::holds_alternative<Location>(a.value())) {
    for (auto l : kAllLocations) out.emplace_back(l);
  } else {
    for (auto c : kAllCategories) out.emplace_back(c);
  }
  return out;
}

Scene make_blank_scene(int n) {
  Scene s;
  s.frames.resize(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) s.frames[static_cast<std::size_t>(i)].index = i;
  return s;
}

std::vector<std::string> check_scene(const Scene& scene) {
  std::vector<std::string> problems;
  bool any_object = false;
  std::vector<int> ordinals;
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const Frame& f = scene.frames[i];
    if (f.index != static_cast<int>(i)) {
      problems.push_back("frame " + std::to_string(i) + " has index " + std::to_string(f.index));
    }
    if (f.objects.size() > 4) problems.push_back("frame " + std::to_string(i) + " holds more than 4 objects");
    std::array<bool, 4> used{};
    for (const auto& o : f.objects) {
      any_object = true;
      auto slot = static_cast<std::size_t>(o.location);
      if (used[slot]) {
        problems.push_back("frame " + std::to_string(i) + " has two objects at " +
                           std::string(to_string(o.location)));
      }
      used[slot] = true;
      if (o.stimulus.object_index < 0 || o.stimulus.object_index >= kObjectsPerCategory) {
        problems.push_back("object index out of range in frame " + std::to_string(i));
      }
      if (o.stimulus.view_index < 0) problems.push_back("negative view index in frame " + std::to_string(i));
      if (o.object_ordinal) ordinals.push_back(*o.object_ordinal);
    }
  }
  if (!any_object) problems.emplace_back("scene contains no objects");
  std::sort(ordinals.begin(), ordinals.end());
  if (std::adjacent_find(ordinals.begin(), ordinals.end()) != ordinals.end()) {
    problems.emplace_back("object ordinals are not unique");
  }
  return problems;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    if (violations[i].node) os << "node " << *violations[i].node << ": ";
    os << violations[i].reason;
  }
  return os.str();
}

}  // namespace pambench
