#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pambench/stimuli.hpp"
#include "pambench/task.hpp"

namespace pambench {

enum class TaskKind : std::uint8_t {
  perc_cat_r,
  perc_cat_c,
  perc_loc_r,
  perc_loc_c,
  att_feat_r,
  att_feat_c,
  att_spa_r,
  att_spa_c,
  mem_cat_r,
  mem_cat_c,
  mem_loc_r,
  mem_loc_c,
  mem_dis_cat_r,
  mem_dis_cat_c,
  mem_dis_loc_r,
  mem_dis_loc_c,
  cvr_cat_h,
  cvr_loc_h,
  cvr_cat_m,
  cvr_loc_m,
  cvr_cat_l,
  cvr_loc_l,
};

inline constexpr int kTaskKindCount = 22;

struct TaskKindInfo {
  TaskKind kind;
  std::string_view name;
  int chance_percent;  // nominal, as displayed
  AnswerSpacePolicy policy;
};

const std::array<TaskKindInfo, kTaskKindCount>& all_task_kinds();
const TaskKindInfo& kind_info(TaskKind k);
std::string_view to_string(TaskKind k) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view s) noexcept;
bool is_cvr(TaskKind k) noexcept;
bool is_compare(TaskKind k) noexcept;

// ---------------------------------------------------------------------------
// AutoTask

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class RootOp : std::uint8_t { is_same, and_op, or_op, not_same, get_loc, get_category };
std::string_view to_string(RootOp op) noexcept;
std::optional<RootOp> parse_root_op(std::string_view s) noexcept;

enum class FeatureSelection : std::uint8_t { category, location, both };
std::string_view to_string(FeatureSelection f) noexcept;
std::optional<FeatureSelection> parse_feature_selection(std::string_view s) noexcept;

struct AutoTaskParams {
  IntRange and_or_ops{1, 1};
  IntRange switch_ops{0, 0};
  IntRange n_frames{6, 6};
  IntRange n_distractors{0, 0};
  std::vector<RootOp> root_operators{RootOp::is_same, RootOp::and_op, RootOp::or_op, RootOp::not_same};
  std::vector<RootOp> boolean_operators{RootOp::is_same, RootOp::and_op, RootOp::or_op, RootOp::not_same};
  FeatureSelection feature_selection = FeatureSelection::both;

  void validate() const;  // throws InvalidParams
  friend bool operator==(const AutoTaskParams&, const AutoTaskParams&) = default;
};

enum class Preset : std::uint8_t { low, medium, high, high_distractor, finetune };
std::string_view to_string(Preset p) noexcept;
std::optional<Preset> parse_preset(std::string_view s) noexcept;
AutoTaskParams preset_params(Preset p, FeatureSelection f = FeatureSelection::both);

// Deterministic per (params, seed). Throws InvalidParams, GenerationFailure.
TaskGraph autotask(const AutoTaskParams& params, std::uint64_t seed);

// Scene for an AutoTask graph: one object per referenced frame, distractors in
// unreferenced frames. Throws GenerationFailure.
Scene sample_scene(const TaskGraph& graph, const AutoTaskParams& params, std::uint64_t seed,
                   const ViewCatalog& catalog);
inline Scene sample_scene(const TaskGraph& graph, const AutoTaskParams& params, std::uint64_t seed,
                          const AssetPack& pack) {
  return sample_scene(graph, params, seed, pack.catalog());
}

// ---------------------------------------------------------------------------
// Instantiation

struct PamConfig {
  IntRange delay_frames{2, 4};
  IntRange attention_objects{2, 4};
  IntRange distractors_per_delay{1, 2};
  bool balance = true;

  void validate() const;  // throws InvalidParams
  friend bool operator==(const PamConfig&, const PamConfig&) = default;
};

struct Instance {
  TaskGraph graph;
  Scene scene;
};

// Compare kinds (and boolean-rooted CVR kinds) target `true` on even seeds
// and `false` on odd seeds when balancing is on, so consecutive seeds alternate.
bool balance_target(std::uint64_t seed) noexcept;

Instance instantiate_pam(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog, const PamConfig& cfg = {});
inline Instance instantiate_pam(TaskKind kind, std::uint64_t seed, const AssetPack& pack, const PamConfig& cfg = {}) {
  return instantiate_pam(kind, seed, pack.catalog(), cfg);
}

AutoTaskParams cvr_params(TaskKind kind);  // throws KindMismatch for PAM kinds

// Graph and scene from the same seed.
Instance instantiate_cvr(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog);
inline Instance instantiate_cvr(TaskKind kind, std::uint64_t seed, const AssetPack& pack) {
  return instantiate_cvr(kind, seed, pack.catalog());
}

// Several trials of one generated task share the graph and differ in scene.
// With `balance`, boolean-rooted graphs are resampled until the answer equals
// balance_target(scene_seed).
Scene balanced_scene(const TaskGraph& graph, const AutoTaskParams& params, std::uint64_t scene_seed,
                     const ViewCatalog& catalog, bool balance);

// Dispatches on the kind.
Instance instantiate(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog, const PamConfig& cfg = {});

}  // namespace pambench
