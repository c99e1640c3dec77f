#include <algorithm>
#include <map>

#include "pambench/errors.hpp"
#include "pambench/taskgen.hpp"
#include "sampling.hpp"

namespace pambench {

namespace detail {

void set_relation(Rng& rng, const ViewCatalog& catalog, AttributeKind kind, const SceneObject& a, SceneObject& b,
                  bool equal) {
  switch (kind) {
    case AttributeKind::location:
      b.location = equal ? a.location : other_location(rng, a.location);
      break;
    case AttributeKind::category:
      if (equal) {
        b.stimulus = random_stimulus(rng, catalog, a.stimulus.category);
      } else {
        b.stimulus = random_stimulus(rng, catalog, other_category(rng, a.stimulus.category));
      }
      break;
    case AttributeKind::identity:
      if (equal) {
        b.stimulus.category = a.stimulus.category;
        b.stimulus.object_index = a.stimulus.object_index;
        b.stimulus.view_index = random_view(rng, catalog, a.stimulus.category, a.stimulus.object_index);
      } else {
        // Half of the mismatches share the category, so identity is not just category.
        do {
          b.stimulus = rng.coin() ? random_stimulus(rng, catalog, a.stimulus.category) : random_stimulus(rng, catalog);
        } while (identity_of(b.stimulus) == identity_of(a.stimulus));
      }
      break;
  }
}

}  // namespace detail

using namespace detail;

namespace {

bool contains(const std::vector<RootOp>& v, RootOp op) { return std::find(v.begin(), v.end(), op) != v.end(); }
bool is_connective(RootOp op) { return op == RootOp::and_op || op == RootOp::or_op; }
bool is_getter(RootOp op) { return op == RootOp::get_loc || op == RootOp::get_category; }

struct Vocab {
  std::vector<RootOp> value_ops;  // usable at the root or in a Switch branch
  std::vector<RootOp> cond_ops;   // boolean ops usable as a Switch condition
  std::vector<RootOp> leaf_ops;   // IsSame / NotSame
  std::vector<RootOp> conn_ops;   // And / Or
  std::vector<AttributeKind> compare_kinds;
};

Vocab make_vocab(const AutoTaskParams& p) {
  Vocab v;
  for (RootOp op : p.root_operators) {
    if (op == RootOp::get_loc && p.feature_selection == FeatureSelection::category) continue;
    if (op == RootOp::get_category && p.feature_selection == FeatureSelection::location) continue;
    if (is_connective(op) && !contains(p.boolean_operators, op)) continue;
    if (!contains(v.value_ops, op)) v.value_ops.push_back(op);
  }
  for (RootOp op : p.boolean_operators) {
    if (is_connective(op)) {
      v.conn_ops.push_back(op);
    } else {
      v.leaf_ops.push_back(op);
    }
    v.cond_ops.push_back(op);
  }
  switch (p.feature_selection) {
    case FeatureSelection::category: v.compare_kinds = {AttributeKind::category}; break;
    case FeatureSelection::location: v.compare_kinds = {AttributeKind::location}; break;
    case FeatureSelection::both:
      v.compare_kinds = {AttributeKind::category, AttributeKind::location, AttributeKind::identity};
      break;
  }
  return v;
}

struct Slot {
  RootOp op;
  int connectives = 0;
};

int selects_needed(const Slot& s) {
  if (is_getter(s.op)) return 1;
  if (is_connective(s.op)) return 2 * (s.connectives + 1);
  return 2;
}

class Builder {
 public:
  Builder(Rng& rng, const Vocab& v, std::vector<int> frames) : rng_(rng), v_(v), frames_(std::move(frames)) {
    std::vector<int> sorted = frames_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) ordinal_[sorted[i]] = static_cast<int>(i) + 1;
  }

  NodeId slot(const Slot& s) {
    if (s.op == RootOp::get_loc) return g_.add(GetAttr{AttributeKind::location, select()});
    if (s.op == RootOp::get_category) return g_.add(GetAttr{AttributeKind::category, select()});
    if (!is_connective(s.op)) return leaf(s.op);
    // left-deep chain; the outermost connective is the slot's own op
    NodeId acc = leaf(rng_.pick(v_.leaf_ops));
    for (int i = 0; i < s.connectives; ++i) {
      const RootOp op = i + 1 == s.connectives ? s.op : rng_.pick(v_.conn_ops);
      NodeId rhs = leaf(rng_.pick(v_.leaf_ops));
      acc = op == RootOp::and_op ? g_.add(And{acc, rhs}) : g_.add(Or{acc, rhs});
    }
    return acc;
  }

  NodeId add_switch(NodeId c, NodeId t, NodeId e) { return g_.add(Switch{c, t, e}); }

  TaskGraph finish(NodeId root) {
    g_.root = root;
    return std::move(g_);
  }

 private:
  NodeId select() {
    const int f = frames_[next_++];
    return g_.add(Select{f, NoCue{}, ordinal_[f]});
  }

  NodeId leaf(RootOp op) {
    const AttributeKind k = rng_.pick(v_.compare_kinds);
    NodeId a = select();
    NodeId b = select();
    return op == RootOp::not_same ? g_.add(NotSame{k, a, b}) : g_.add(IsSame{k, a, b});
  }

  Rng& rng_;
  const Vocab& v_;
  std::vector<int> frames_;
  std::map<int, int> ordinal_;
  std::size_t next_ = 0;
  TaskGraph g_;
};

}  // namespace

TaskGraph autotask(const AutoTaskParams& params, std::uint64_t seed) {
  params.validate();
  const Vocab v = make_vocab(params);
  Rng rng(derive_seed(seed, label_hash("autotask")));

  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    const int s = rng.uniform(params.switch_ops.lo, params.switch_ops.hi);
    const int a = rng.uniform(params.and_or_ops.lo, params.and_or_ops.hi);
    const int n_frames = rng.uniform(params.n_frames.lo, params.n_frames.hi);

    // Slot ops: s conditions, then s+1 value slots (root or Switch branches).
    std::vector<Slot> conds(static_cast<std::size_t>(s)), values(static_cast<std::size_t>(s) + 1);
    bool drawn = false;
    for (int tries = 0; tries < kRetryBudget && !drawn; ++tries) {
      int k = 0;
      for (auto& c : conds) k += is_connective((c.op = rng.pick(v.cond_ops)));
      for (auto& x : values) k += is_connective((x.op = rng.pick(v.value_ops)));
      drawn = a == 0 ? k == 0 : (k >= 1 && k <= a);
    }
    if (!drawn) continue;

    // Every connective slot gets one connective, the rest are spread at random.
    std::vector<Slot*> conn_slots;
    for (auto& c : conds) {
      if (is_connective(c.op)) conn_slots.push_back(&c);
    }
    for (auto& x : values) {
      if (is_connective(x.op)) conn_slots.push_back(&x);
    }
    for (Slot* sl : conn_slots) sl->connectives = 1;
    for (int extra = a - static_cast<int>(conn_slots.size()); extra > 0; --extra) {
      conn_slots[rng.index(conn_slots.size())]->connectives++;
    }

    int n_sel = 0;
    for (const auto& c : conds) n_sel += selects_needed(c);
    for (const auto& x : values) n_sel += selects_needed(x);
    if (n_sel > n_frames) continue;

    std::vector<int> frames(static_cast<std::size_t>(n_frames));
    for (int i = 0; i < n_frames; ++i) frames[static_cast<std::size_t>(i)] = i;
    rng.shuffle(frames);
    frames.resize(static_cast<std::size_t>(n_sel));

    Builder b(rng, v, frames);
    if (s == 0) return b.finish(b.slot(values[0]));

    // Switch chain: each level nests the next switch into one of its branches.
    std::vector<bool> nest_then(static_cast<std::size_t>(s));
    for (int i = 0; i + 1 < s; ++i) nest_then[static_cast<std::size_t>(i)] = rng.coin();
    std::size_t vi = 0;
    auto build = [&](auto&& self, int level) -> NodeId {
      NodeId c = b.slot(conds[static_cast<std::size_t>(level)]);
      if (level + 1 == s) {
        NodeId t = b.slot(values[vi++]);
        NodeId e = b.slot(values[vi++]);
        return b.add_switch(c, t, e);
      }
      if (nest_then[static_cast<std::size_t>(level)]) {
        NodeId t = self(self, level + 1);
        NodeId e = b.slot(values[vi++]);
        return b.add_switch(c, t, e);
      }
      NodeId t = b.slot(values[vi++]);
      NodeId e = self(self, level + 1);
      return b.add_switch(c, t, e);
    };
    return b.finish(build(build, 0));
  }
  throw GenerationFailure("autotask: no graph within the retry budget fits " + std::to_string(params.n_frames.hi) +
                          " frames");
}

namespace {

struct SelectRef {
  int frame;
  Cue cue;
  int ordinal;
};

bool cue_matches(const Cue& cue, const SceneObject& o) {
  if (const auto* l = std::get_if<Location>(&cue)) return o.location == *l;
  if (const auto* c = std::get_if<Category>(&cue)) return o.stimulus.category == *c;
  return true;
}

void apply_cue(const Cue& cue, SceneObject& o, Rng& rng, const ViewCatalog& catalog) {
  if (const auto* l = std::get_if<Location>(&cue)) o.location = *l;
  if (const auto* c = std::get_if<Category>(&cue)) {
    if (o.stimulus.category != *c) o.stimulus = random_stimulus(rng, catalog, *c);
  }
}

int matches_in_frame(const Frame& f, const Cue& cue) {
  int n = 0;
  for (const auto& o : f.objects) n += cue_matches(cue, o);
  return n;
}

}  // namespace

Scene sample_scene(const TaskGraph& graph, const AutoTaskParams& params, std::uint64_t seed,
                   const ViewCatalog& catalog) {
  if (auto r = validate_graph(graph); !r.ok()) throw InvalidGraph("invalid task graph: " + r.to_string());
  Rng rng(derive_seed(seed, label_hash("scene")));

  // Selects with the same frame and cue denote the same object.
  std::vector<int> obj_of(graph.nodes.size(), -1);
  std::vector<SelectRef> objs;
  int max_frame = -1;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto* s = std::get_if<Select>(&graph.nodes[i]);
    if (!s) continue;
    max_frame = std::max(max_frame, s->frame_index);
    for (std::size_t j = 0; j < objs.size(); ++j) {
      if (objs[j].frame == s->frame_index && objs[j].cue == s->cue) obj_of[i] = static_cast<int>(j);
    }
    if (obj_of[i] < 0) {
      obj_of[i] = static_cast<int>(objs.size());
      objs.push_back({s->frame_index, s->cue, s->object_ordinal});
    }
  }

  const int lo = std::max(params.n_frames.lo, max_frame + 1);
  const int hi = std::max(params.n_frames.hi, lo);

  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    const int n_frames = rng.uniform(lo, hi);
    std::vector<SceneObject> placed(objs.size());
    std::vector<bool> done(objs.size(), false);

    auto fresh = [&](std::size_t i) {
      SceneObject o{random_stimulus(rng, catalog), random_location(rng), objs[i].ordinal};
      apply_cue(objs[i].cue, o, rng, catalog);
      placed[i] = o;
      done[i] = true;
    };

    // Comparisons first, so every leaf gets a coin-flip target.
    for (const Node& n : graph.nodes) {
      AttributeKind kind;
      NodeId a, b;
      if (const auto* is = std::get_if<IsSame>(&n)) {
        kind = is->kind, a = is->a, b = is->b;
      } else if (const auto* ns = std::get_if<NotSame>(&n)) {
        kind = ns->kind, a = ns->a, b = ns->b;
      } else {
        continue;
      }
      const auto ia = static_cast<std::size_t>(obj_of[a]);
      const auto ib = static_cast<std::size_t>(obj_of[b]);
      if (ia == ib) continue;
      if (!done[ia]) fresh(ia);
      if (done[ib]) continue;
      fresh(ib);
      set_relation(rng, catalog, kind, placed[ia], placed[ib], rng.coin());
    }
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (!done[i]) fresh(i);
    }

    Scene scene = make_blank_scene(n_frames);
    bool ok = true;
    for (std::size_t i = 0; i < objs.size() && ok; ++i) {
      ok = cue_matches(objs[i].cue, placed[i]);
      scene.frames[static_cast<std::size_t>(objs[i].frame)].objects.push_back(placed[i]);
    }
    if (!ok || !check_scene(scene).empty()) continue;

    // Each select must resolve to exactly its own object.
    for (std::size_t i = 0; i < objs.size() && ok; ++i) {
      ok = matches_in_frame(scene.frames[static_cast<std::size_t>(objs[i].frame)], objs[i].cue) == 1;
    }
    if (!ok) continue;

    // Distractors go where no select can see them: frames without selects, or
    // frames whose selects are all cued (avoiding their cues).
    std::vector<bool> uncued_frame(static_cast<std::size_t>(n_frames), false);
    for (const auto& o : objs) {
      if (std::holds_alternative<NoCue>(o.cue)) uncued_frame[static_cast<std::size_t>(o.frame)] = true;
    }
    const int n_dis = rng.uniform(params.n_distractors.lo, params.n_distractors.hi);
    for (int d = 0; d < n_dis; ++d) {
      std::vector<std::size_t> open;
      for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        if (!uncued_frame[f] && scene.frames[f].objects.size() < 4) open.push_back(f);
      }
      if (open.empty()) {
        throw GenerationFailure("no room for " + std::to_string(n_dis) + " distractors in " +
                                std::to_string(n_frames) + " frames");
      }
      Frame& f = scene.frames[open[rng.index(open.size())]];
      SceneObject dis{random_stimulus(rng, catalog), free_location(rng, f), std::nullopt};
      for (const auto& o : objs) {
        if (o.frame != f.index) continue;
        if (const auto* c = std::get_if<Category>(&o.cue); c && dis.stimulus.category == *c) {
          dis.stimulus = random_stimulus(rng, catalog, other_category(rng, *c));
        }
      }
      f.objects.push_back(dis);
    }
    return scene;
  }
  throw GenerationFailure("sample_scene: retry budget exhausted");
}

Scene balanced_scene(const TaskGraph& graph, const AutoTaskParams& params, std::uint64_t scene_seed,
                     const ViewCatalog& catalog, bool balance) {
  const bool boolean_root =
      validate_graph(graph).ok() && infer_types(graph)[graph.root].is_only(ValueType::boolean);
  if (!balance || !boolean_root) return sample_scene(graph, params, scene_seed, catalog);
  const bool target = balance_target(scene_seed);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    const std::uint64_t s = attempt == 0 ? scene_seed : derive_seed(scene_seed, static_cast<std::uint64_t>(attempt));
    Scene scene = sample_scene(graph, params, s, catalog);
    if (std::get<bool>(eval_graph(graph, scene).value()) == target) return scene;
  }
  throw GenerationFailure("could not balance the answer within the retry budget");
}

Instance instantiate_cvr(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog) {
  const AutoTaskParams params = cvr_params(kind);
  TaskGraph g = autotask(params, seed);
  Scene s = balanced_scene(g, params, seed, catalog, true);
  return {std::move(g), std::move(s)};
}

}  // namespace pambench
