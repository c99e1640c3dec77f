#pragma once

// On-disk trial layout:
//   <root>/manifest.json
//   <root>/<task>/trial{N}/frames/epoch{i}.png
//   <root>/<task>/trial{N}/frames/new_task_info.json   {"new_instruction", "answers"}
//   <root>/<task>/trial{N}/trial_meta.json             everything else

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pambench/stimuli.hpp"
#include "pambench/taskgen.hpp"
#include "pambench/trial.hpp"

namespace pambench {

inline constexpr std::string_view kGeneratorVersion = "pambench-gen/1";
inline constexpr int kTrialMetaVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr std::size_t kSftShardSize = 50000;

// Writes <task_dir>/trial{id}; replaces an existing trial directory of that id.
// Requires a full trial. Throws IoError, InvalidGraph.
std::filesystem::path write_trial(const std::filesystem::path& task_dir, const Trial& trial, const AssetPack& pack,
                                  const CanvasConfig& cfg);

// Full trial when trial_meta.json is present, reduced otherwise.
// Throws MissingFile, SchemaError.
LoadedTrial read_trial(const std::filesystem::path& trial_dir);

// Trial directories under a dataset root: task dirs by name, trials by number.
std::vector<std::filesystem::path> list_trial_dirs(const std::filesystem::path& root);

// A reference unique within a dataset, e.g. "Perc-Loc-R/trial3".
std::string trial_ref(const std::filesystem::path& trial_dir);

struct SeedRange {
  std::uint64_t lo = 0, hi = 0;  // half-open
  bool overlaps(const SeedRange& o) const noexcept { return lo < o.hi && o.lo < hi; }
  friend bool operator==(const SeedRange&, const SeedRange&) = default;
};

// `task` is a kind name ("Perc-Loc-R") or "autotask:<preset>". Named kinds draw a
// fresh instance per trial; autotask entries draw one graph per task and
// n_trials scenes over it.
struct DatasetEntry {
  std::string task;
  int n_tasks = 1;
  int n_trials = 1;
  std::optional<AnswerSpacePolicy> policy;  // defaults to the kind's policy

  std::string dir_name() const;  // "autotask:high" -> "autotask-high"
  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetSpec {
  std::string dataset_id = "dataset";
  std::string role = "eval";  // "eval" or "train"
  std::uint64_t seed_base = 0;
  std::vector<DatasetEntry> entries;
  CanvasConfig canvas;
  PamConfig pam;

  void validate() const;  // throws InvalidParams
  std::uint64_t trial_count() const;
  // Trial seeds are seed_base + running trial index, so the range is contiguous.
  SeedRange seed_range() const;
};

// Built-in specs: "human-baseline" (22 kinds), "eval" (22 kinds), "finetune"
// (autotask:finetune, train role). For the first two `trials_per_task` is per kind;
// for finetune it is scenes per generated task, with `n_tasks` graphs.
DatasetSpec dataset_preset(std::string_view name, int trials_per_task, std::uint64_t seed_base, int n_tasks = 100);

struct DatasetManifest {
  DatasetSpec spec;
  std::string generator_version;
  std::string pack_digest;
  std::string content_digest;  // tree digest of the root, manifest excluded
  std::uint64_t trial_count = 0;
};

std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text, const std::string& file);
DatasetManifest read_manifest(const std::filesystem::path& root);
// Hand-written spec file: {dataset_id?, role?, seed_base?, entries: [{task, n_tasks?, n_trials, policy?}],
// canvas?, pam?}. Missing keys take the defaults.
DatasetSpec spec_from_text(const std::string& text, const std::string& file);
std::string manifest_digest(const DatasetManifest& m);

// Throws InvalidParams when a train and an eval manifest share seeds.
void check_disjoint(const DatasetManifest& a, const DatasetManifest& b);

// The i-th trial (0-based, running over entries) of a spec, without rendering.
Trial generate_trial(const DatasetSpec& spec, std::uint64_t index, const ViewCatalog& catalog);

DatasetManifest generate_dataset(const DatasetSpec& spec, const AssetPack& pack, const std::filesystem::path& root,
                                 int jobs = 1);

// Re-renders frames of an existing dataset with a (possibly different) canvas.
void rerender_dataset(const std::filesystem::path& root, const AssetPack& pack, const CanvasConfig& cfg);

// One JSON array of records per file; more than `shard_size` records splits into
// <stem>-00000.json, <stem>-00001.json, ... Returns the files written.
std::vector<std::filesystem::path> export_sft(const std::filesystem::path& root, const std::filesystem::path& out,
                                              std::size_t shard_size = kSftShardSize);

}  // namespace pambench
