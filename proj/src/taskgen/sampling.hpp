#pragma once

// Helpers shared by the PAM and AutoTask generators.

#include "pambench/rng.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/task.hpp"

namespace pambench::detail {

inline constexpr int kRetryBudget = 100;

inline Category random_category(Rng& rng) { return kAllCategories[rng.index(kAllCategories.size())]; }
inline Location random_location(Rng& rng) { return kAllLocations[rng.index(kAllLocations.size())]; }

inline Category other_category(Rng& rng, Category c) {
  Category o = c;
  while (o == c) o = random_category(rng);
  return o;
}

inline Location other_location(Rng& rng, Location l) {
  Location o = l;
  while (o == l) o = random_location(rng);
  return o;
}

inline int random_view(Rng& rng, const ViewCatalog& catalog, Category c, int object_index) {
  return rng.uniform(0, catalog.views_of(c, object_index) - 1);
}

inline StimulusId random_stimulus(Rng& rng, const ViewCatalog& catalog, Category c) {
  const int obj = rng.uniform(0, kObjectsPerCategory - 1);
  return {c, obj, random_view(rng, catalog, c, obj)};
}

inline StimulusId random_stimulus(Rng& rng, const ViewCatalog& catalog) {
  return random_stimulus(rng, catalog, random_category(rng));
}

// Location not yet used in the frame; the frame must have room.
inline Location free_location(Rng& rng, const Frame& f) {
  std::vector<Location> open;
  for (Location l : kAllLocations) {
    bool used = false;
    for (const auto& o : f.objects) used = used || o.location == l;
    if (!used) open.push_back(l);
  }
  return open[rng.index(open.size())];
}

// Makes `b` agree or disagree with `a` on one attribute.
void set_relation(Rng& rng, const ViewCatalog& catalog, AttributeKind kind, const SceneObject& a, SceneObject& b,
                  bool equal);

}  // namespace pambench::detail
