#include "pambench/errors.hpp"
#include "pambench/taskgen.hpp"
#include "sampling.hpp"

namespace pambench {

using namespace detail;

namespace {

enum class Family { perception, attention_feature, attention_spatial, memory, memory_distractor };

struct Shape {
  Family family;
  AttributeKind attribute;  // reported or compared
  bool compare;
};

Shape shape_of(TaskKind k) {
  using K = TaskKind;
  using A = AttributeKind;
  switch (k) {
    case K::perc_cat_r: return {Family::perception, A::category, false};
    case K::perc_cat_c: return {Family::perception, A::category, true};
    case K::perc_loc_r: return {Family::perception, A::location, false};
    case K::perc_loc_c: return {Family::perception, A::location, true};
    case K::att_feat_r: return {Family::attention_feature, A::location, false};
    case K::att_feat_c: return {Family::attention_feature, A::location, true};
    case K::att_spa_r: return {Family::attention_spatial, A::category, false};
    case K::att_spa_c: return {Family::attention_spatial, A::category, true};
    case K::mem_cat_r: return {Family::memory, A::category, false};
    case K::mem_cat_c: return {Family::memory, A::category, true};
    case K::mem_loc_r: return {Family::memory, A::location, false};
    case K::mem_loc_c: return {Family::memory, A::location, true};
    case K::mem_dis_cat_r: return {Family::memory_distractor, A::category, false};
    case K::mem_dis_cat_c: return {Family::memory_distractor, A::category, true};
    case K::mem_dis_loc_r: return {Family::memory_distractor, A::location, false};
    case K::mem_dis_loc_c: return {Family::memory_distractor, A::location, true};
    default: throw KindMismatch(std::string(to_string(k)) + " is not a PAM kind");
  }
}

class PamBuilder {
 public:
  PamBuilder(Rng& rng, const ViewCatalog& catalog) : rng_(rng), catalog_(catalog) {}

  SceneObject single(int ordinal) {
    return {random_stimulus(rng_, catalog_), random_location(rng_), ordinal};
  }

  // Fills `f` with the target plus 1..3 others. The cue for the target is the
  // target's category (feature) or location (spatial); others never share it.
  Cue attention_frame(Frame& f, SceneObject target, int n_objects, bool feature) {
    f.objects.push_back(target);
    while (static_cast<int>(f.objects.size()) < n_objects) {
      SceneObject o{feature ? random_stimulus(rng_, catalog_, other_category(rng_, target.stimulus.category))
                            : random_stimulus(rng_, catalog_),
                    free_location(rng_, f), std::nullopt};
      f.objects.push_back(o);
    }
    // Shuffle so the target is not always first in the frame.
    rng_.shuffle(f.objects);
    if (feature) return target.stimulus.category;
    return target.location;
  }

  void distractors(Frame& f, int n) {
    for (int i = 0; i < n; ++i) {
      f.objects.push_back({random_stimulus(rng_, catalog_), free_location(rng_, f), std::nullopt});
    }
  }

 private:
  Rng& rng_;
  const ViewCatalog& catalog_;
};

}  // namespace

Instance instantiate_pam(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog, const PamConfig& cfg) {
  const Shape shape = shape_of(kind);
  cfg.validate();
  Rng rng(derive_seed(seed, label_hash(to_string(kind))));
  PamBuilder pb(rng, catalog);
  const bool target = cfg.balance ? balance_target(seed) : rng.coin();

  Instance out;
  TaskGraph& g = out.graph;
  Scene& s = out.scene;

  auto finish = [&](NodeId a, std::optional<NodeId> b) {
    g.root = b ? g.add(IsSame{shape.attribute, a, *b}) : g.add(GetAttr{shape.attribute, a});
  };

  switch (shape.family) {
    case Family::perception: {
      s = make_blank_scene(shape.compare ? 2 : 1);
      SceneObject first = pb.single(1);
      s.frames[0].objects.push_back(first);
      NodeId a = g.add(Select{0, NoCue{}, 1});
      if (!shape.compare) {
        finish(a, std::nullopt);
        break;
      }
      SceneObject second = pb.single(2);
      set_relation(rng, catalog, shape.attribute, first, second, target);
      s.frames[1].objects.push_back(second);
      finish(a, g.add(Select{1, NoCue{}, 2}));
      break;
    }
    case Family::attention_feature:
    case Family::attention_spatial: {
      const bool feature = shape.family == Family::attention_feature;
      const int frames = shape.compare ? 2 : 1;
      s = make_blank_scene(frames);
      SceneObject t1 = pb.single(1);
      Cue c1 = pb.attention_frame(s.frames[0], t1, rng.uniform(cfg.attention_objects.lo, cfg.attention_objects.hi),
                                  feature);
      NodeId a = g.add(Select{0, c1, 1});
      if (!shape.compare) {
        finish(a, std::nullopt);
        break;
      }
      SceneObject t2 = pb.single(2);
      set_relation(rng, catalog, shape.attribute, t1, t2, target);
      Cue c2 = pb.attention_frame(s.frames[1], t2, rng.uniform(cfg.attention_objects.lo, cfg.attention_objects.hi),
                                  feature);
      finish(a, g.add(Select{1, c2, 2}));
      break;
    }
    case Family::memory:
    case Family::memory_distractor: {
      const int delays = rng.uniform(cfg.delay_frames.lo, cfg.delay_frames.hi);
      const int frames = 1 + delays + (shape.compare ? 1 : 0);
      s = make_blank_scene(frames);
      SceneObject first = pb.single(1);
      s.frames[0].objects.push_back(first);
      if (shape.family == Family::memory_distractor) {
        for (int d = 1; d <= delays; ++d) {
          pb.distractors(s.frames[static_cast<std::size_t>(d)],
                         rng.uniform(cfg.distractors_per_delay.lo, cfg.distractors_per_delay.hi));
        }
      }
      NodeId a = g.add(Select{0, NoCue{}, 1});
      if (!shape.compare) {
        finish(a, std::nullopt);
        break;
      }
      SceneObject last = pb.single(2);
      set_relation(rng, catalog, shape.attribute, first, last, target);
      s.frames.back().objects.push_back(last);
      finish(a, g.add(Select{frames - 1, NoCue{}, 2}));
      break;
    }
  }
  return out;
}

}  // namespace pambench
