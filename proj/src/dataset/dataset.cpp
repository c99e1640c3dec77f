#include "pambench/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "pambench/errors.hpp"
#include "pambench/json_io.hpp"
#include "pambench/language.hpp"
#include "pambench/prompt.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAutotaskPrefix = "autotask:";

std::optional<int> numeric_suffix(const std::string& name, std::string_view prefix, std::string_view suffix = {}) {
  if (!name.starts_with(prefix) || !name.ends_with(suffix)) return std::nullopt;
  const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
  if (digits.empty() || digits.size() > 9 || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
    return std::nullopt;
  }
  return std::stoi(digits);
}

std::optional<Preset> autotask_preset(const std::string& task) {
  if (!task.starts_with(kAutotaskPrefix)) return std::nullopt;
  return parse_preset(std::string_view(task).substr(kAutotaskPrefix.size()));
}

AnswerSpacePolicy entry_policy(const DatasetEntry& e) {
  if (e.policy) return *e.policy;
  if (auto k = parse_task_kind(e.task)) return kind_info(*k).policy;
  return AnswerSpacePolicy::exact;
}

Json trial_meta_json(const Trial& t) {
  Json captions = Json::array();
  for (const auto& c : t.captions) captions.push_back(c);
  return {{"format", "pambench-trial-meta"},
          {"version", kTrialMetaVersion},
          {"grammar_version", kGrammarVersion},
          {"task", t.task},
          {"kind", t.kind ? Json(to_string(*t.kind)) : Json(nullptr)},
          {"trial_id", t.trial_id},
          {"seed", t.seed},
          {"pack_digest", t.pack_digest},
          {"policy", to_string(t.policy)},
          {"n_frames", t.n_frames},
          {"instruction", t.instruction},
          {"answer", to_string(t.answer)},
          {"possible_answers", answers_to_json(t.possible_answers)},
          {"captions", std::move(captions)},
          {"graph", graph_to_json(*t.graph)},
          {"scene", scene_to_json(*t.scene)}};
}

std::vector<fs::path> list_frames(const fs::path& frames_dir) {
  std::vector<std::pair<int, fs::path>> found;
  if (fs::is_directory(frames_dir)) {
    for (const auto& e : fs::directory_iterator(frames_dir)) {
      if (!e.is_regular_file()) continue;
      if (auto i = numeric_suffix(e.path().filename().string(), "epoch", ".png")) found.emplace_back(*i, e.path());
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i].first != static_cast<int>(i)) {
      throw MissingFile("missing " + (frames_dir / ("epoch" + std::to_string(i) + ".png")).string());
    }
    out.push_back(found[i].second);
  }
  if (out.empty()) throw MissingFile("no epoch*.png frames in " + frames_dir.string());
  return out;
}

void fill_from_meta(Trial& t, const Json& m, const std::string& file) {
  if (require_string(m, "format", file) != "pambench-trial-meta") throw SchemaError(file, "format", "unexpected");
  if (require_int(m, "version", file) != kTrialMetaVersion) throw SchemaError(file, "version", "unsupported");
  t.task = require_string(m, "task", file);
  const Json& kind = require(m, "kind", file);
  if (kind.is_null()) {
    t.kind = std::nullopt;
  } else {
    auto k = kind.is_string() ? parse_task_kind(kind.get<std::string>()) : std::nullopt;
    if (!k) throw SchemaError(file, "kind", "unknown task kind");
    t.kind = k;
  }
  const auto id = require_int(m, "trial_id", file);
  if (id < 0 || id > INT32_MAX) throw SchemaError(file, "trial_id", "out of range");
  t.trial_id = static_cast<int>(id);
  t.seed = require_uint(m, "seed", file);
  t.pack_digest = require_string(m, "pack_digest", file);
  auto pol = parse_policy(require_string(m, "policy", file));
  if (!pol) throw SchemaError(file, "policy", "unknown policy");
  t.policy = *pol;
  const auto nf = require_int(m, "n_frames", file);
  if (nf < 1 || nf > 100000) throw SchemaError(file, "n_frames", "out of range");
  t.n_frames = static_cast<int>(nf);
  t.instruction = require_string(m, "instruction", file);
  auto ans = Answer::parse(require_string(m, "answer", file));
  if (!ans) throw SchemaError(file, "answer", "not a vocabulary word");
  t.answer = *ans;
  t.possible_answers = answers_from_json(require(m, "possible_answers", file), file, "possible_answers");
  const Json& caps = require(m, "captions", file);
  if (!caps.is_array()) throw SchemaError(file, "captions", "expected an array");
  t.captions.clear();
  for (const Json& c : caps) {
    if (!c.is_string()) throw SchemaError(file, "captions", "expected strings");
    t.captions.push_back(c.get<std::string>());
  }
  t.graph = graph_from_json(require(m, "graph", file), file);
  t.scene = scene_from_json(require(m, "scene", file), file);
}

// Cross-checks a full trial; every failure names the metadata file.
void verify_full(const Trial& t, const std::string& file) {
  if (static_cast<int>(t.scene->frames.size()) != t.n_frames) throw SchemaError(file, "scene", "frame count mismatch");
  if (t.captions.size() != t.scene->frames.size()) throw SchemaError(file, "captions", "one caption per frame");
  Answer truth;
  std::string instr;
  try {
    truth = eval_graph(*t.graph, *t.scene);
    instr = synth_instruction(*t.graph, *t.scene);
  } catch (const Error& e) {
    throw SchemaError(file, "graph", e.what());
  }
  if (truth != t.answer) throw SchemaError(file, "answer", "does not match the graph evaluated on the scene");
  if (instr != t.instruction) throw SchemaError(file, "instruction", "does not match the graph");
  if (std::find(t.possible_answers.begin(), t.possible_answers.end(), t.answer) == t.possible_answers.end()) {
    throw SchemaError(file, "possible_answers", "answer not among the possible answers");
  }
}

Json manifest_json(const DatasetManifest& m) {
  Json entries = Json::array();
  for (const auto& e : m.spec.entries) {
    entries.push_back({{"task", e.task},
                       {"n_tasks", e.n_tasks},
                       {"n_trials", e.n_trials},
                       {"policy", to_string(entry_policy(e))}});
  }
  const SeedRange r = m.spec.seed_range();
  return {{"format", "pambench-dataset"},
          {"version", kManifestVersion},
          {"dataset_id", m.spec.dataset_id},
          {"role", m.spec.role},
          {"generator_version", m.generator_version},
          {"grammar_version", kGrammarVersion},
          {"pack_digest", m.pack_digest},
          {"seed_base", m.spec.seed_base},
          {"seed_range", {r.lo, r.hi}},
          {"trial_count", m.trial_count},
          {"entries", std::move(entries)},
          {"canvas", canvas_to_json(m.spec.canvas)},
          {"pam", pam_config_to_json(m.spec.pam)},
          {"content_digest", m.content_digest}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Trial I/O

fs::path write_trial(const fs::path& task_dir, const Trial& trial, const AssetPack& pack, const CanvasConfig& cfg) {
  if (!trial.full()) throw InvalidGraph("write_trial needs a trial with graph and scene");
  const fs::path dir = task_dir / ("trial" + std::to_string(trial.trial_id));
  std::error_code ec;
  if (fs::exists(dir / "frames" / "new_task_info.json")) fs::remove_all(dir, ec);
  if (ec) throw IoError("cannot replace " + dir.string() + ": " + ec.message());
  render_trial(*trial.scene, pack, cfg, dir / "frames");
  Json info = {{"new_instruction", trial.instruction}, {"answers", Json::array({to_string(trial.answer)})}};
  write_file_atomic(dir / "frames" / "new_task_info.json", dump_json(info));
  write_file_atomic(dir / "trial_meta.json", dump_json(trial_meta_json(trial)));
  return dir;
}

LoadedTrial read_trial(const fs::path& trial_dir) {
  LoadedTrial out;
  out.dir = trial_dir;
  const fs::path info_path = trial_dir / "frames" / "new_task_info.json";
  const std::string info_file = info_path.string();
  const Json info = read_json_file(info_path);
  const std::string instruction = require_string(info, "new_instruction", info_file);
  AnswerSet answers = answers_from_json(require(info, "answers", info_file), info_file, "answers");
  if (answers.empty()) throw SchemaError(info_file, "answers", "empty");
  out.frames = list_frames(trial_dir / "frames");

  Trial& t = out.trial;
  const fs::path meta_path = trial_dir / "trial_meta.json";
  if (fs::exists(meta_path)) {
    const std::string file = meta_path.string();
    fill_from_meta(t, read_json_file(meta_path), file);
    verify_full(t, file);
    if (t.instruction != instruction) throw SchemaError(info_file, "new_instruction", "differs from trial_meta.json");
    if (t.answer != answers.back()) throw SchemaError(info_file, "answers", "differs from trial_meta.json");
    if (static_cast<int>(out.frames.size()) != t.n_frames) {
      throw SchemaError(file, "n_frames", "expected " + std::to_string(t.n_frames) + " frame images, found " +
                                              std::to_string(out.frames.size()));
    }
    return out;
  }

  // foreign layout: only the instruction, the answer and the images
  t.task = trial_dir.parent_path().filename().string();
  t.kind = parse_task_kind(t.task);
  t.trial_id = numeric_suffix(trial_dir.filename().string(), "trial").value_or(0);
  t.instruction = instruction;
  t.answer = answers.back();
  t.possible_answers = t.kind && kind_info(*t.kind).policy == AnswerSpacePolicy::full_vocabulary
                           ? full_vocabulary()
                           : answer_type_space(t.answer);
  t.policy = t.kind ? kind_info(*t.kind).policy : AnswerSpacePolicy::exact;
  t.n_frames = static_cast<int>(out.frames.size());
  return out;
}

std::vector<fs::path> list_trial_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw MissingFile("no dataset at " + root.string());
  std::vector<fs::path> tasks;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) tasks.push_back(e.path());
  }
  std::sort(tasks.begin(), tasks.end());
  std::vector<fs::path> out;
  for (const auto& task : tasks) {
    std::vector<std::pair<int, fs::path>> trials;
    for (const auto& e : fs::directory_iterator(task)) {
      if (!e.is_directory()) continue;
      if (auto n = numeric_suffix(e.path().filename().string(), "trial")) trials.emplace_back(*n, e.path());
    }
    std::sort(trials.begin(), trials.end());
    for (auto& [n, p] : trials) out.push_back(std::move(p));
  }
  return out;
}

std::string trial_ref(const fs::path& trial_dir) {
  return trial_dir.parent_path().filename().string() + "/" + trial_dir.filename().string();
}

// ---------------------------------------------------------------------------
// Specs and manifests

std::string DatasetEntry::dir_name() const {
  if (task.starts_with(kAutotaskPrefix)) return "autotask-" + task.substr(kAutotaskPrefix.size());
  return task;
}

void DatasetSpec::validate() const {
  if (dataset_id.empty()) throw InvalidParams("dataset id is empty");
  if (role != "eval" && role != "train") throw InvalidParams("role must be \"eval\" or \"train\"");
  if (entries.empty()) throw InvalidParams("dataset spec has no entries");
  std::vector<std::string> dirs;
  for (const auto& e : entries) {
    if (!parse_task_kind(e.task) && !autotask_preset(e.task)) throw InvalidParams("unknown task \"" + e.task + "\"");
    if (e.n_tasks <= 0 || e.n_trials <= 0) throw InvalidParams("n_tasks and n_trials must be positive for " + e.task);
    dirs.push_back(e.dir_name());
  }
  std::sort(dirs.begin(), dirs.end());
  if (std::adjacent_find(dirs.begin(), dirs.end()) != dirs.end()) throw InvalidParams("duplicate dataset entries");
  canvas.validate();
  pam.validate();
  const std::uint64_t n = trial_count();
  if (seed_base > UINT64_MAX - n) throw InvalidParams("seed range overflows");
}

std::uint64_t DatasetSpec::trial_count() const {
  std::uint64_t n = 0;
  for (const auto& e : entries) n += static_cast<std::uint64_t>(e.n_tasks) * static_cast<std::uint64_t>(e.n_trials);
  return n;
}

SeedRange DatasetSpec::seed_range() const { return {seed_base, seed_base + trial_count()}; }

DatasetSpec dataset_preset(std::string_view name, int trials_per_task, std::uint64_t seed_base, int n_tasks) {
  DatasetSpec s;
  s.dataset_id = std::string(name);
  s.seed_base = seed_base;
  if (name == "human-baseline" || name == "eval") {
    for (const auto& k : all_task_kinds()) s.entries.push_back({std::string(k.name), 1, trials_per_task, std::nullopt});
  } else if (name == "finetune") {
    s.role = "train";
    s.entries.push_back({"autotask:finetune", n_tasks, trials_per_task, std::nullopt});
  } else {
    throw InvalidParams("unknown dataset preset \"" + std::string(name) + "\"");
  }
  return s;
}

std::string manifest_to_text(const DatasetManifest& m) { return dump_json(manifest_json(m)); }

DatasetManifest manifest_from_text(const std::string& text, const std::string& file) {
  const Json j = parse_json_text(text, file);
  if (require_string(j, "format", file) != "pambench-dataset") throw SchemaError(file, "format", "unexpected");
  if (require_int(j, "version", file) != kManifestVersion) throw SchemaError(file, "version", "unsupported");
  DatasetManifest m;
  m.spec.dataset_id = require_string(j, "dataset_id", file);
  m.spec.role = require_string(j, "role", file);
  m.spec.seed_base = require_uint(j, "seed_base", file);
  m.generator_version = require_string(j, "generator_version", file);
  m.pack_digest = require_string(j, "pack_digest", file);
  m.content_digest = require_string(j, "content_digest", file);
  m.trial_count = require_uint(j, "trial_count", file);
  const Json& entries = require(j, "entries", file);
  if (!entries.is_array()) throw SchemaError(file, "entries", "expected an array");
  for (const Json& e : entries) {
    DatasetEntry d;
    d.task = require_string(e, "task", file);
    d.n_tasks = static_cast<int>(require_int(e, "n_tasks", file));
    d.n_trials = static_cast<int>(require_int(e, "n_trials", file));
    auto pol = parse_policy(require_string(e, "policy", file));
    if (!pol) throw SchemaError(file, "policy", "unknown policy");
    if (entry_policy(d) != *pol) d.policy = pol;  // only overrides are kept explicit
    m.spec.entries.push_back(std::move(d));
  }
  m.spec.canvas = canvas_from_json(require(j, "canvas", file), file);
  m.spec.pam = pam_config_from_json(require(j, "pam", file), file);
  try {
    m.spec.validate();
  } catch (const InvalidParams& e) {
    throw SchemaError(file, "entries", e.what());
  }
  if (m.trial_count != m.spec.trial_count()) throw SchemaError(file, "trial_count", "disagrees with the entries");
  const Json& range = require(j, "seed_range", file);
  const SeedRange r = m.spec.seed_range();
  if (!range.is_array() || range.size() != 2 || range[0] != r.lo || range[1] != r.hi) {
    throw SchemaError(file, "seed_range", "disagrees with seed_base and the entries");
  }
  return m;
}

DatasetSpec spec_from_text(const std::string& text, const std::string& file) {
  const Json j = parse_json_text(text, file);
  if (!j.is_object()) throw SchemaError(file, "", "expected a JSON object");
  DatasetSpec s;
  if (j.contains("dataset_id")) s.dataset_id = require_string(j, "dataset_id", file);
  if (j.contains("role")) s.role = require_string(j, "role", file);
  if (j.contains("seed_base")) s.seed_base = require_uint(j, "seed_base", file);
  const Json& entries = require(j, "entries", file);
  if (!entries.is_array()) throw SchemaError(file, "entries", "expected an array");
  for (const Json& e : entries) {
    DatasetEntry d;
    d.task = require_string(e, "task", file);
    d.n_tasks = e.contains("n_tasks") ? static_cast<int>(require_int(e, "n_tasks", file)) : 1;
    d.n_trials = static_cast<int>(require_int(e, "n_trials", file));
    if (e.contains("policy")) {
      auto pol = parse_policy(require_string(e, "policy", file));
      if (!pol) throw SchemaError(file, "policy", "unknown policy");
      d.policy = pol;
    }
    s.entries.push_back(std::move(d));
  }
  if (j.contains("canvas")) s.canvas = canvas_from_json(j["canvas"], file);
  if (j.contains("pam")) s.pam = pam_config_from_json(j["pam"], file);
  try {
    s.validate();
  } catch (const InvalidParams& e) {
    throw SchemaError(file, "entries", e.what());
  }
  return s;
}

DatasetManifest read_manifest(const fs::path& root) {
  const fs::path p = root / "manifest.json";
  if (!fs::exists(p)) throw MissingFile("missing " + p.string());
  return manifest_from_text(read_file_text(p), p.string());
}

std::string manifest_digest(const DatasetManifest& m) { return sha256_hex(manifest_to_text(m)); }

void check_disjoint(const DatasetManifest& a, const DatasetManifest& b) {
  if (a.spec.role == b.spec.role) return;
  if (a.spec.seed_range().overlaps(b.spec.seed_range())) {
    throw InvalidParams("train and eval datasets \"" + a.spec.dataset_id + "\" and \"" + b.spec.dataset_id +
                        "\" share seeds");
  }
}

// ---------------------------------------------------------------------------
// Generation

Trial generate_trial(const DatasetSpec& spec, std::uint64_t index, const ViewCatalog& catalog) {
  std::uint64_t offset = index;
  for (const auto& e : spec.entries) {
    const std::uint64_t n = static_cast<std::uint64_t>(e.n_tasks) * static_cast<std::uint64_t>(e.n_trials);
    if (offset >= n) {
      offset -= n;
      continue;
    }
    const std::uint64_t seed = spec.seed_base + index;
    const int trial_id = static_cast<int>(offset);
    const AnswerSpacePolicy policy = entry_policy(e);
    if (auto kind = parse_task_kind(e.task)) {
      return make_trial(e.dir_name(), kind, trial_id, instantiate(*kind, seed, catalog, spec.pam), policy, seed,
                        catalog.digest);
    }
    const AutoTaskParams params = preset_params(*autotask_preset(e.task));
    // one graph per task, seeded by the task's first trial
    const std::uint64_t task_seed = seed - offset % static_cast<std::uint64_t>(e.n_trials);
    Instance in;
    in.graph = autotask(params, task_seed);
    in.scene = balanced_scene(in.graph, params, seed, catalog, spec.pam.balance);
    return make_trial(e.dir_name(), std::nullopt, trial_id, std::move(in), policy, seed, catalog.digest);
  }
  throw InvalidParams("trial index " + std::to_string(index) + " beyond the dataset");
}

DatasetManifest generate_dataset(const DatasetSpec& spec, const AssetPack& pack, const fs::path& root, int jobs) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  const std::uint64_t total = spec.trial_count();
  std::vector<fs::path> task_dirs;
  for (const auto& e : spec.entries) task_dirs.push_back(root / e.dir_name());
  auto dir_for = [&](std::uint64_t index) {
    std::uint64_t offset = index;
    for (std::size_t i = 0; i < spec.entries.size(); ++i) {
      const auto& e = spec.entries[i];
      const std::uint64_t n = static_cast<std::uint64_t>(e.n_tasks) * static_cast<std::uint64_t>(e.n_trials);
      if (offset < n) return task_dirs[i];
      offset -= n;
    }
    return task_dirs.back();
  };

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        write_trial(dir_for(i), generate_trial(spec, i, pack.catalog()), pack, spec.canvas);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::uint64_t>(total, 64))));
  std::vector<std::thread> threads;
  for (int w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  DatasetManifest m;
  m.spec = spec;
  m.generator_version = std::string(kGeneratorVersion);
  m.pack_digest = pack.digest();
  m.trial_count = total;
  m.content_digest = tree_digest(root, {"manifest.json"});
  write_file_atomic(root / "manifest.json", manifest_to_text(m));
  return m;
}

void rerender_dataset(const fs::path& root, const AssetPack& pack, const CanvasConfig& cfg) {
  cfg.validate();
  DatasetManifest m = read_manifest(root);
  if (m.pack_digest != pack.digest()) {
    throw InvalidParams("dataset was generated with pack " + m.pack_digest + ", got " + pack.digest());
  }
  for (const auto& dir : list_trial_dirs(root)) {
    LoadedTrial lt = read_trial(dir);
    if (!lt.trial.full()) throw MissingFile("no trial_meta.json in " + dir.string());
    render_trial(*lt.trial.scene, pack, cfg, dir / "frames");
  }
  m.spec.canvas = cfg;
  m.content_digest = tree_digest(root, {"manifest.json"});
  write_file_atomic(root / "manifest.json", manifest_to_text(m));
}

// ---------------------------------------------------------------------------
// Fine-tuning export

std::vector<fs::path> export_sft(const fs::path& root, const fs::path& out, std::size_t shard_size) {
  if (shard_size == 0) throw InvalidParams("shard size must be positive");
  const fs::path out_dir = out.parent_path().empty() ? fs::path(".") : out.parent_path();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path base_dir = fs::absolute(out_dir).lexically_normal();

  const auto dirs = list_trial_dirs(root);
  Json records = Json::array();
  PromptOptions opts;
  opts.chain_of_thought = false;
  opts.embed_images = false;
  for (const auto& dir : dirs) {
    LoadedTrial lt = read_trial(dir);
    const MessageSeq prompt = build_prompt(lt, EvalMode::base, std::nullopt, opts);
    Json images = Json::array();
    for (const auto& f : lt.frames) {
      images.push_back(fs::absolute(f).lexically_normal().lexically_relative(base_dir).generic_string());
    }
    records.push_back({{"messages",
                        Json::array({{{"role", "user"}, {"content", flatten_user_text(prompt)}},
                                     {{"role", "assistant"}, {"content", to_string(lt.trial.answer)}}})},
                       {"images", std::move(images)}});
  }

  std::vector<fs::path> written;
  if (records.size() <= shard_size) {
    write_file_atomic(out, dump_json(records));
    written.push_back(out);
    return written;
  }
  const std::string stem = out.stem().string();
  const std::string ext = out.has_extension() ? out.extension().string() : ".json";
  for (std::size_t start = 0, shard = 0; start < records.size(); start += shard_size, ++shard) {
    Json part = Json::array();
    for (std::size_t i = start; i < std::min(records.size(), start + shard_size); ++i) part.push_back(records[i]);
    char idx[16];
    std::snprintf(idx, sizeof idx, "-%05zu", shard);
    const fs::path p = out_dir / (stem + idx + ext);
    write_file_atomic(p, dump_json(part));
    written.push_back(p);
  }
  return written;
}

}  // namespace pambench
