#include <algorithm>

#include "doctest.h"
#include "pambench/errors.hpp"
#include "pambench/task.hpp"

using namespace pambench;

namespace {

SceneObject obj(Category c, int idx, Location l, int view = 0) {
  return SceneObject{StimulusId{c, idx, view}, l, std::nullopt};
}

bool has_reason(const ValidationReport& r, std::string_view needle) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.reason.find(needle) != std::string::npos; });
}

// Two frames, one object each; IsSame on `kind`.
TaskGraph compare_graph(AttributeKind kind, bool negate = false) {
  TaskGraph g;
  NodeId a = g.add(Select{0, NoCue{}, 1});
  NodeId b = g.add(Select{1, NoCue{}, 2});
  g.root = negate ? g.add(NotSame{kind, a, b}) : g.add(IsSame{kind, a, b});
  return g;
}

Scene two_frames(SceneObject x, SceneObject y) {
  Scene s = make_blank_scene(2);
  s.frames[0].objects.push_back(x);
  s.frames[1].objects.push_back(y);
  return s;
}

}  // namespace

TEST_CASE("minimal graph validates") {
  TaskGraph g;
  NodeId s = g.add(Select{0, NoCue{}, 1});
  g.root = g.add(GetAttr{AttributeKind::location, s});
  CHECK(validate_graph(g).ok());
  CHECK(infer_types(g)[g.root].is_only(ValueType::location));
}

TEST_CASE("switch with location condition is rejected") {
  TaskGraph g;
  NodeId s = g.add(Select{0, NoCue{}, 1});
  NodeId loc = g.add(GetAttr{AttributeKind::location, s});
  NodeId cat = g.add(GetAttr{AttributeKind::category, s});
  g.root = g.add(Switch{loc, cat, cat});
  auto r = validate_graph(g);
  CHECK_FALSE(r.ok());
  CHECK(has_reason(r, "non-boolean condition"));
}

TEST_CASE("select root is rejected") {
  TaskGraph g;
  g.root = g.add(Select{0, NoCue{}, 1});
  auto r = validate_graph(g);
  CHECK(has_reason(r, "root must produce an Answer"));
}

TEST_CASE("structural violations") {
  SUBCASE("empty") { CHECK(has_reason(validate_graph(TaskGraph{}), "no nodes")); }
  SUBCASE("dangling") {
    TaskGraph g;
    g.root = g.add(GetAttr{AttributeKind::location, 7});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("cycle") {
    TaskGraph g;
    NodeId s = g.add(Select{0, NoCue{}, 1});
    NodeId eq = g.add(IsSame{AttributeKind::category, s, s});
    NodeId a = g.add(And{eq, 3});
    g.add(And{a, eq});
    g.root = 3;
    CHECK(has_reason(validate_graph(g), "cycle"));
  }
  SUBCASE("comparison over non-select") {
    TaskGraph g;
    NodeId s = g.add(Select{0, NoCue{}, 1});
    NodeId l = g.add(GetAttr{AttributeKind::location, s});
    g.root = g.add(IsSame{AttributeKind::location, l, s});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("select as switch branch") {
    TaskGraph g;
    NodeId a = g.add(Select{0, NoCue{}, 1});
    NodeId b = g.add(Select{1, NoCue{}, 2});
    NodeId c = g.add(IsSame{AttributeKind::category, a, b});
    g.root = g.add(Switch{c, a, c});
    CHECK(has_reason(validate_graph(g), "Select"));
  }
}

TEST_CASE("identity root") {
  TaskGraph g;
  NodeId s = g.add(Select{0, NoCue{}, 1});
  g.root = g.add(GetAttr{AttributeKind::identity, s});
  CHECK_FALSE(validate_graph(g).ok());
  CHECK_THROWS_AS(possible_answers(g, AnswerSpacePolicy::exact), IdentityRoot);
  Scene sc = make_blank_scene(1);
  sc.frames[0].objects.push_back(obj(Category::boats, 0, Location::top_left));
  CHECK_THROWS_AS(brute_force_answer(g, sc), IdentityRoot);
}

TEST_CASE("same category across frames") {
  auto g = compare_graph(AttributeKind::category);
  auto s = two_frames(obj(Category::chairs, 1, Location::top_left), obj(Category::chairs, 5, Location::bottom_right));
  CHECK(eval_graph(g, s) == Answer(true));
  CHECK(brute_force_answer(g, s) == Answer(true));
}

TEST_CASE("identity ignores view") {
  auto g = compare_graph(AttributeKind::identity);
  auto s = two_frames(obj(Category::cars, 3, Location::top_left, 0), obj(Category::cars, 3, Location::top_right, 7));
  CHECK(eval_graph(g, s) == Answer(true));
  s.frames[1].objects[0].stimulus.object_index = 4;
  CHECK(eval_graph(g, s) == Answer(false));
}

TEST_CASE("NotSame negates IsSame") {
  for (int i = 0; i < 4; ++i) {
    auto s = two_frames(obj(Category::boats, 0, Location::top_left),
                        obj(i % 2 ? Category::boats : Category::planes, 0, static_cast<Location>(i)));
    for (auto k : {AttributeKind::category, AttributeKind::location, AttributeKind::identity}) {
      bool eq = std::get<bool>(eval_graph(compare_graph(k), s).value());
      bool ne = std::get<bool>(eval_graph(compare_graph(k, true), s).value());
      CHECK(eq != ne);
    }
  }
}

TEST_CASE("boolean connectives") {
  // f0: chairs@TL, f1: chairs@BR, f2: boats@TL
  Scene s = make_blank_scene(3);
  s.frames[0].objects.push_back(obj(Category::chairs, 0, Location::top_left));
  s.frames[1].objects.push_back(obj(Category::chairs, 1, Location::bottom_right));
  s.frames[2].objects.push_back(obj(Category::boats, 2, Location::top_left));
  TaskGraph g;
  NodeId a = g.add(Select{0, NoCue{}, 1});
  NodeId b = g.add(Select{1, NoCue{}, 2});
  NodeId c = g.add(Select{2, NoCue{}, 3});
  NodeId t = g.add(IsSame{AttributeKind::category, a, b});
  NodeId f = g.add(IsSame{AttributeKind::category, a, c});
  SUBCASE("and") {
    g.root = g.add(And{t, f});
    CHECK(eval_graph(g, s) == Answer(false));
    CHECK(brute_force_answer(g, s) == Answer(false));
  }
  SUBCASE("or") {
    g.root = g.add(Or{f, t});
    CHECK(eval_graph(g, s) == Answer(true));
    CHECK(brute_force_answer(g, s) == Answer(true));
  }
}

TEST_CASE("cued selects") {
  Scene s = make_blank_scene(1);
  s.frames[0].objects = {obj(Category::chairs, 0, Location::top_left), obj(Category::boats, 1, Location::bottom_left),
                         obj(Category::chairs, 2, Location::top_right)};
  TaskGraph g;
  SUBCASE("by category") {
    NodeId sel = g.add(Select{0, Category::boats, 1});
    g.root = g.add(GetAttr{AttributeKind::location, sel});
    CHECK(eval_graph(g, s) == Answer(Location::bottom_left));
  }
  SUBCASE("by location") {
    NodeId sel = g.add(Select{0, Location::top_right, 1});
    g.root = g.add(GetAttr{AttributeKind::category, sel});
    CHECK(eval_graph(g, s) == Answer(Category::chairs));
  }
  SUBCASE("ambiguous") {
    NodeId sel = g.add(Select{0, Category::chairs, 1});
    g.root = g.add(GetAttr{AttributeKind::location, sel});
    CHECK_THROWS_AS(eval_graph(g, s), UnresolvedSelect);
    CHECK_THROWS_AS(brute_force_answer(g, s), UnresolvedSelect);
  }
  SUBCASE("absent") {
    NodeId sel = g.add(Select{0, Category::planes, 1});
    g.root = g.add(GetAttr{AttributeKind::location, sel});
    CHECK_THROWS_AS(eval_graph(g, s), UnresolvedSelect);
  }
  SUBCASE("missing frame") {
    NodeId sel = g.add(Select{3, NoCue{}, 1});
    g.root = g.add(GetAttr{AttributeKind::location, sel});
    CHECK_THROWS_AS(eval_graph(g, s), MissingFrame);
    CHECK_THROWS_AS(brute_force_answer(g, s), MissingFrame);
  }
}

TEST_CASE("switch takes the else branch") {
  // objects 1..7 in frames 0..6; identity(3) != identity(2); object 1 at top right.
  Scene s = make_blank_scene(7);
  for (int i = 0; i < 7; ++i) {
    s.frames[static_cast<std::size_t>(i)].objects.push_back(
        obj(static_cast<Category>(i % 8), i, static_cast<Location>(i % 4)));
  }
  s.frames[0].objects[0].location = Location::top_right;
  TaskGraph g;
  std::vector<NodeId> sel;
  for (int i = 0; i < 7; ++i) sel.push_back(g.add(Select{i, NoCue{}, i + 1}));
  NodeId cond = g.add(IsSame{AttributeKind::identity, sel[2], sel[1]});
  NodeId then_b = g.add(GetAttr{AttributeKind::category, sel[6]});
  NodeId else_b = g.add(GetAttr{AttributeKind::location, sel[0]});
  g.root = g.add(Switch{cond, then_b, else_b});
  CHECK(eval_graph(g, s) == Answer(Location::top_right));
  CHECK(brute_force_answer(g, s) == Answer(Location::top_right));

  // Untaken branch isolation: the then-branch object may even be unresolvable.
  s.frames[6].objects.clear();
  CHECK(eval_graph(g, s) == Answer(Location::top_right));
}

TEST_CASE("answer spaces") {
  TaskGraph loc;
  NodeId s0 = loc.add(Select{0, NoCue{}, 1});
  loc.root = loc.add(GetAttr{AttributeKind::location, s0});
  auto locs = possible_answers(loc, AnswerSpacePolicy::exact);
  REQUIRE(locs.size() == 4);
  CHECK(to_string(locs[0]) == "bottom right");
  CHECK(to_string(locs[1]) == "bottom left");
  CHECK(to_string(locs[2]) == "top left");
  CHECK(to_string(locs[3]) == "top right");

  auto cmp = compare_graph(AttributeKind::category);
  auto bools = possible_answers(cmp, AnswerSpacePolicy::exact);
  CHECK(bools == AnswerSet{Answer(true), Answer(false)});
  CHECK(chance_level(cmp, AnswerSpacePolicy::exact) == 0.5);

  TaskGraph mixed = compare_graph(AttributeKind::category);
  NodeId cond = mixed.root;
  NodeId l = mixed.add(GetAttr{AttributeKind::location, 0});
  NodeId c2 = mixed.add(NotSame{AttributeKind::location, 0, 1});
  mixed.root = mixed.add(Switch{cond, c2, l});
  auto six = possible_answers(mixed, AnswerSpacePolicy::exact);
  CHECK(six.size() == 6);
  CHECK(std::is_sorted(six.begin(), six.end()));
  CHECK(possible_answers(mixed, AnswerSpacePolicy::full_vocabulary).size() == 14);

  TaskGraph cat;
  NodeId s1 = cat.add(Select{0, NoCue{}, 1});
  cat.root = cat.add(GetAttr{AttributeKind::category, s1});
  CHECK(chance_percent(chance_level(cat, AnswerSpacePolicy::exact)) == 13);
  CHECK(chance_percent(chance_level(cat, AnswerSpacePolicy::full_vocabulary)) == 7);
  CHECK(chance_percent(chance_level(loc, AnswerSpacePolicy::exact)) == 25);
}

TEST_CASE("vocabulary round trip") {
  auto v = full_vocabulary();
  REQUIRE(v.size() == 14);
  for (int i = 0; i < 14; ++i) {
    CHECK(v[static_cast<std::size_t>(i)].vocab_index() == i);
    auto parsed = Answer::parse(to_string(v[static_cast<std::size_t>(i)]));
    REQUIRE(parsed);
    CHECK(*parsed == v[static_cast<std::size_t>(i)]);
  }
  CHECK_FALSE(Answer::parse("sofa"));
  CHECK(to_string(v[13]) == "tables");
}

TEST_CASE("scene invariants") {
  Scene s = make_blank_scene(2);
  CHECK_FALSE(check_scene(s).empty());
  s.frames[0].objects = {obj(Category::boats, 0, Location::top_left), obj(Category::cars, 1, Location::top_left)};
  CHECK_FALSE(check_scene(s).empty());
  s.frames[0].objects[1].location = Location::top_right;
  CHECK(check_scene(s).empty());
}
