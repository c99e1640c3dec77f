#include <algorithm>

#include "pambench/errors.hpp"
#include "pambench/taskgen.hpp"

namespace pambench {
namespace {

using P = AnswerSpacePolicy;
constexpr std::array<TaskKindInfo, kTaskKindCount> kKinds = {{
    {TaskKind::perc_cat_r, "Perc-Cat-R", 13, P::exact},
    {TaskKind::perc_cat_c, "Perc-Cat-C", 50, P::exact},
    {TaskKind::perc_loc_r, "Perc-Loc-R", 25, P::exact},
    {TaskKind::perc_loc_c, "Perc-Loc-C", 50, P::exact},
    {TaskKind::att_feat_r, "Att-Feat-R", 25, P::exact},
    {TaskKind::att_feat_c, "Att-Feat-C", 50, P::exact},
    {TaskKind::att_spa_r, "Att-Spa-R", 13, P::exact},
    {TaskKind::att_spa_c, "Att-Spa-C", 50, P::exact},
    {TaskKind::mem_cat_r, "Mem-Cat-R", 13, P::exact},
    {TaskKind::mem_cat_c, "Mem-Cat-C", 50, P::exact},
    {TaskKind::mem_loc_r, "Mem-Loc-R", 25, P::exact},
    {TaskKind::mem_loc_c, "Mem-Loc-C", 50, P::exact},
    {TaskKind::mem_dis_cat_r, "Mem-Dis-Cat-R", 13, P::exact},
    {TaskKind::mem_dis_cat_c, "Mem-Dis-Cat-C", 50, P::exact},
    {TaskKind::mem_dis_loc_r, "Mem-Dis-Loc-R", 25, P::exact},
    {TaskKind::mem_dis_loc_c, "Mem-Dis-Loc-C", 50, P::exact},
    {TaskKind::cvr_cat_h, "CVR-Cat-H", 7, P::full_vocabulary},
    {TaskKind::cvr_loc_h, "CVR-Loc-H", 7, P::full_vocabulary},
    {TaskKind::cvr_cat_m, "CVR-Cat-M", 50, P::exact},
    {TaskKind::cvr_loc_m, "CVR-Loc-M", 50, P::exact},
    {TaskKind::cvr_cat_l, "CVR-Cat-L", 50, P::exact},
    {TaskKind::cvr_loc_l, "CVR-Loc-L", 50, P::exact},
}};

constexpr std::array<std::string_view, 6> kRootOpNames = {"IsSame", "And", "Or", "NotSame", "GetLoc", "GetCategory"};
constexpr std::array<std::string_view, 3> kFeatureNames = {"category", "location", "both"};
constexpr std::array<std::string_view, 5> kPresetNames = {"low", "medium", "high", "high-distractor", "finetune"};

template <typename E, std::size_t N>
std::optional<E> find_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

void check_range(const IntRange& r, const char* what) {
  if (r.lo < 0 || r.hi < r.lo) throw InvalidParams(std::string(what) + " range must be non-empty and non-negative");
}

bool has(const std::vector<RootOp>& ops, RootOp op) { return std::find(ops.begin(), ops.end(), op) != ops.end(); }

}  // namespace

const std::array<TaskKindInfo, kTaskKindCount>& all_task_kinds() { return kKinds; }
const TaskKindInfo& kind_info(TaskKind k) { return kKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(TaskKind k) noexcept { return kKinds[static_cast<std::size_t>(k)].name; }

std::optional<TaskKind> parse_task_kind(std::string_view s) noexcept {
  for (const auto& k : kKinds) {
    if (k.name == s) return k.kind;
  }
  return std::nullopt;
}

bool is_cvr(TaskKind k) noexcept { return k >= TaskKind::cvr_cat_h; }

bool is_compare(TaskKind k) noexcept { return !is_cvr(k) && kind_info(k).name.back() == 'C'; }

std::string_view to_string(RootOp op) noexcept { return kRootOpNames[static_cast<std::size_t>(op)]; }
std::optional<RootOp> parse_root_op(std::string_view s) noexcept { return find_name<RootOp>(kRootOpNames, s); }
std::string_view to_string(FeatureSelection f) noexcept { return kFeatureNames[static_cast<std::size_t>(f)]; }
std::optional<FeatureSelection> parse_feature_selection(std::string_view s) noexcept {
  return find_name<FeatureSelection>(kFeatureNames, s);
}
std::string_view to_string(Preset p) noexcept { return kPresetNames[static_cast<std::size_t>(p)]; }
std::optional<Preset> parse_preset(std::string_view s) noexcept { return find_name<Preset>(kPresetNames, s); }

void AutoTaskParams::validate() const {
  check_range(and_or_ops, "and_or_ops");
  check_range(switch_ops, "switch_ops");
  check_range(n_frames, "n_frames");
  check_range(n_distractors, "n_distractors");
  if (root_operators.empty()) throw InvalidParams("root_operators must not be empty");
  const bool leaf_ok = has(boolean_operators, RootOp::is_same) || has(boolean_operators, RootOp::not_same);
  if (!leaf_ok) throw InvalidParams("boolean_operators needs IsSame or NotSame");
  for (RootOp op : boolean_operators) {
    if (op == RootOp::get_loc || op == RootOp::get_category) {
      throw InvalidParams("boolean_operators may only hold IsSame, And, Or, NotSame");
    }
  }
  const bool connective_ok = has(boolean_operators, RootOp::and_op) || has(boolean_operators, RootOp::or_op);
  if (and_or_ops.hi > 0 && !connective_ok) throw InvalidParams("and_or_ops > 0 needs And or Or");
  if (and_or_ops.lo > 0 && !connective_ok) throw InvalidParams("and_or_ops > 0 needs And or Or");

  bool value_root = false, bool_root = false, connective_root = false;
  for (RootOp op : root_operators) {
    if (op == RootOp::get_loc && feature_selection != FeatureSelection::category) value_root = true;
    if (op == RootOp::get_category && feature_selection != FeatureSelection::location) value_root = true;
    if (op == RootOp::is_same || op == RootOp::not_same) bool_root = true;
    if (op == RootOp::and_op || op == RootOp::or_op) connective_root = true;
  }
  if (!value_root && !bool_root && !connective_root) {
    throw InvalidParams("no root operator is usable under feature selection " + std::string(to_string(feature_selection)));
  }
  if (and_or_ops.lo == 0 && switch_ops.lo == 0 && !value_root && !bool_root) {
    throw InvalidParams("root operators are all connectives but and_or_ops may be 0");
  }

  // Each condition needs a comparison (2 frames); each branch or the root needs
  // at least one select; each connective adds a comparison.
  const int per_value = value_root ? 1 : 2;
  const int min_frames = 2 * switch_ops.lo + (switch_ops.lo + 1) * per_value + 2 * and_or_ops.lo;
  if (min_frames > n_frames.lo) {
    throw InvalidParams("n_frames lower bound " + std::to_string(n_frames.lo) + " is below the " +
                        std::to_string(min_frames) + " frames implied by the operator counts");
  }
}

void PamConfig::validate() const {
  check_range(delay_frames, "delay_frames");
  check_range(attention_objects, "attention_objects");
  check_range(distractors_per_delay, "distractors_per_delay");
  if (attention_objects.lo < 2 || attention_objects.hi > 4) throw InvalidParams("attention_objects must lie in 2..4");
  if (distractors_per_delay.hi > 4) throw InvalidParams("at most 4 distractors fit in a frame");
  if (distractors_per_delay.lo < 1) throw InvalidParams("distractor delays need at least one distractor");
  if (delay_frames.lo < 1) throw InvalidParams("memory tasks need at least one delay frame");
}

AutoTaskParams preset_params(Preset p, FeatureSelection f) {
  const std::vector<RootOp> boolean{RootOp::is_same, RootOp::and_op, RootOp::or_op, RootOp::not_same};
  const std::vector<RootOp> all{RootOp::is_same, RootOp::and_op,  RootOp::or_op,
                                RootOp::not_same, RootOp::get_loc, RootOp::get_category};
  AutoTaskParams a;
  a.boolean_operators = boolean;
  a.feature_selection = f;
  switch (p) {
    case Preset::low:
      a.and_or_ops = {1, 1};
      a.switch_ops = {0, 0};
      a.n_frames = {6, 6};
      a.root_operators = boolean;
      break;
    case Preset::medium:
      a.and_or_ops = {1, 1};
      a.switch_ops = {1, 1};
      a.n_frames = {8, 8};
      a.root_operators = boolean;
      break;
    case Preset::high:
      a.and_or_ops = {1, 2};
      a.switch_ops = {1, 1};
      a.n_frames = {9, 9};
      a.root_operators = all;
      break;
    case Preset::high_distractor:
      a.and_or_ops = {1, 2};
      a.switch_ops = {1, 1};
      a.n_frames = {12, 12};
      a.n_distractors = {4, 4};
      a.root_operators = all;
      break;
    case Preset::finetune:
      a.and_or_ops = {0, 2};
      a.switch_ops = {0, 1};
      a.n_frames = {3, 9};
      a.root_operators = all;
      break;
  }
  return a;
}

AutoTaskParams cvr_params(TaskKind kind) {
  if (!is_cvr(kind)) throw KindMismatch(std::string(to_string(kind)) + " is not a CVR kind");
  const bool cat = kind == TaskKind::cvr_cat_h || kind == TaskKind::cvr_cat_m || kind == TaskKind::cvr_cat_l;
  const FeatureSelection f = cat ? FeatureSelection::category : FeatureSelection::location;
  switch (kind) {
    case TaskKind::cvr_cat_h:
    case TaskKind::cvr_loc_h: return preset_params(Preset::high, f);
    case TaskKind::cvr_cat_m:
    case TaskKind::cvr_loc_m: return preset_params(Preset::medium, f);
    default: return preset_params(Preset::low, f);
  }
}

bool balance_target(std::uint64_t seed) noexcept { return seed % 2 == 0; }

Instance instantiate(TaskKind kind, std::uint64_t seed, const ViewCatalog& catalog, const PamConfig& cfg) {
  return is_cvr(kind) ? instantiate_cvr(kind, seed, catalog) : instantiate_pam(kind, seed, catalog, cfg);
}

}  // namespace pambench
