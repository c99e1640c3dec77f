// Command-line front end. Exit status: 0 ok, 1 runtime error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "pambench/analysis.hpp"
#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/service.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/util.hpp"

using namespace pambench;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "pambench 1.0 (config format 1)";

void print_table(const ScoreTable& t) {
  std::printf("%s\n", t.name.c_str());
  for (const auto& c : t.groups) std::printf("  %-16s %6llu  %s\n", c.label.c_str(), (unsigned long long)c.n, c.format().c_str());
  std::printf("  --\n");
  for (const auto& c : t.tasks) std::printf("  %-16s %6llu  %s\n", c.label.c_str(), (unsigned long long)c.n, c.format().c_str());
}

struct EndpointOpts {
  std::string url;
  std::string model = "model";
  std::string key_env;
  int max_tokens = 1024;
  int caption_max_tokens = 1024;
  int timeout_s = 120;
  int retries = 5;
  double temperature = 0.0;

  ModelEndpoint endpoint() const {
    ModelEndpoint ep;
    ep.base_url = url;
    ep.model = model;
    ep.api_key_env = key_env;
    ep.max_tokens = max_tokens;
    ep.caption_max_tokens = caption_max_tokens;
    ep.timeout = std::chrono::seconds(timeout_s);
    ep.max_retries = retries;
    ep.temperature = temperature;
    return ep;
  }
};

// Blocks SIGINT/SIGTERM in every thread and stops the server when one arrives.
void serve_until_signal(HttpService& svc) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    svc.stop();
  });
  svc.listen();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark generation, evaluation and scoring"};
  app.set_config("--config", "", "TOML/INI file with option values (format 1)");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // assets synth
  auto* assets = app.add_subcommand("assets", "Stimulus asset packs");
  assets->require_subcommand(1);
  auto* synth = assets->add_subcommand("synth", "Write a synthetic glyph asset pack");
  fs::path synth_out;
  std::uint64_t synth_seed = 0;
  int synth_views = 4;
  synth->add_option("--out", synth_out, "Pack directory")->required();
  synth->add_option("--seed", synth_seed, "Colour seed");
  synth->add_option("--views", synth_views, "Views per object")->check(CLI::Range(1, 64));

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a dataset from a preset or spec file");
  std::string preset;
  fs::path spec_file, gen_out, gen_pack;
  int trials_per_task = 5, n_tasks = 100, jobs = 1;
  std::uint64_t seed_base = 0;
  std::string dataset_id;
  std::vector<fs::path> disjoint_from;
  auto* preset_opt = gen->add_option("--preset", preset, "human-baseline | eval | finetune");
  auto* spec_opt = gen->add_option("--spec", spec_file, "JSON dataset spec")->check(CLI::ExistingFile);
  preset_opt->excludes(spec_opt);
  gen->add_option("--trials-per-task", trials_per_task, "Trials per task (preset only)")->check(CLI::PositiveNumber);
  gen->add_option("--tasks", n_tasks, "Generated tasks (finetune preset)")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed_base, "First trial seed (overrides the spec file)");
  gen->add_option("--id", dataset_id, "Dataset id");
  gen->add_option("--pack", gen_pack, "Asset pack directory")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--out", gen_out, "Dataset root")->required();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--disjoint-from", disjoint_from, "Refuse seeds overlapping these datasets of the other role")
      ->check(CLI::ExistingDirectory);

  // render
  auto* render = app.add_subcommand("render", "Re-render the frames of a dataset");
  fs::path render_ds, render_pack;
  int width = 0, height = 0;
  render->add_option("--dataset", render_ds, "Dataset root")->required()->check(CLI::ExistingDirectory);
  render->add_option("--pack", render_pack, "Asset pack directory")->required()->check(CLI::ExistingDirectory);
  render->add_option("--width", width, "Canvas width (default: keep)");
  render->add_option("--height", height, "Canvas height (default: keep)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a model on a dataset");
  fs::path eval_ds, eval_out;
  std::string mode_s = "base";
  int parallelism = 4;
  EndpointOpts ep, extractor;
  ev->add_option("--dataset", eval_ds, "Dataset root")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--out", eval_out, "Result directory (existing results are kept)")->required();
  ev->add_option("--mode", mode_s, "base | pc | sc | sc_i");
  ev->add_option("--parallelism", parallelism, "Concurrent trials")->check(CLI::PositiveNumber);
  ev->add_option("--endpoint", ep.url, "Base URL of a chat-completions API, or mock:random[:seed]")->required();
  ev->add_option("--model", ep.model, "Model name sent with each request");
  ev->add_option("--api-key-env", ep.key_env, "Environment variable holding the API key");
  ev->add_option("--max-tokens", ep.max_tokens, "Answer token budget");
  ev->add_option("--caption-max-tokens", ep.caption_max_tokens, "Caption token budget");
  ev->add_option("--timeout", ep.timeout_s, "Request timeout in seconds");
  ev->add_option("--retries", ep.retries, "Retries per request");
  ev->add_option("--temperature", ep.temperature, "Sampling temperature");
  ev->add_option("--extractor-endpoint", extractor.url, "Model used to extract answers (default: text scan)");
  ev->add_option("--extractor-model", extractor.model, "Extractor model name");
  ev->add_option("--extractor-api-key-env", extractor.key_env, "Environment variable with the extractor key");

  // score
  auto* sc = app.add_subcommand("score", "Score one or more result sets");
  std::vector<fs::path> score_dirs;
  fs::path report_out;
  std::string stem = "report";
  bool exclude_errors = false;
  sc->add_option("results", score_dirs, "Result directories")->required()->check(CLI::ExistingDirectory);
  sc->add_flag("--exclude-errors", exclude_errors, "Drop errored trials instead of counting them wrong");
  sc->add_option("--out", report_out, "Write <stem>.csv and <stem>.md here");
  sc->add_option("--stem", stem, "Report file stem");

  // compare
  auto* cmp = app.add_subcommand("compare", "Per-row change between two result sets");
  fs::path base_dir, variant_dir;
  cmp->add_option("--base", base_dir, "Baseline result directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--variant", variant_dir, "Variant result directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_flag("--exclude-errors", exclude_errors, "Drop errored trials");
  cmp->add_option("--out", report_out, "Write <stem>.csv and <stem>.md here");
  cmp->add_option("--stem", stem, "Report file stem");

  // export-sft
  auto* sft = app.add_subcommand("export-sft", "Export a dataset as fine-tuning records");
  fs::path sft_ds, sft_out;
  std::size_t shard = kSftShardSize;
  sft->add_option("--dataset", sft_ds, "Dataset root")->required()->check(CLI::ExistingDirectory);
  sft->add_option("--out", sft_out, "Output JSON file")->required();
  sft->add_option("--shard-size", shard, "Records per file")->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the human-baseline backend");
  std::vector<std::string> serve_datasets;
  fs::path sessions_dir, ui_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--dataset", serve_datasets, "name=path of a dataset offered to subjects")->required();
  serve->add_option("--sessions", sessions_dir, "Session log directory")->required();
  serve->add_option("--ui", ui_dir, "Static UI directory")->check(CLI::ExistingDirectory);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks one)")->check(CLI::Range(0, 65535));

  // session-report
  auto* sr = app.add_subcommand("session-report", "Score human session logs");
  fs::path sr_dir;
  bool include_partial = false;
  sr->add_option("--sessions", sr_dir, "Session log directory")->required()->check(CLI::ExistingDirectory);
  sr->add_flag("--include-partial", include_partial, "Also count unfinished sessions");
  sr->add_option("--out", report_out, "Write <stem>.csv and <stem>.md here");
  sr->add_option("--stem", stem, "Report file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      const AssetPack pack = synth_asset_pack(synth_seed, synth_out, synth_views);
      std::printf("pack %s: %zu images, digest %s\n", synth_out.c_str(), pack.image_count(), pack.digest().c_str());
    } else if (*gen) {
      DatasetSpec spec;
      if (!preset.empty()) {
        spec = dataset_preset(preset, trials_per_task, seed_base, n_tasks);
      } else if (!spec_file.empty()) {
        spec = spec_from_text(read_file_text(spec_file), spec_file.string());
        if (gen->count("--seed")) spec.seed_base = seed_base;
      } else {
        std::cerr << "generate: one of --preset or --spec is required\n";
        return 2;
      }
      if (!dataset_id.empty()) spec.dataset_id = dataset_id;
      DatasetManifest planned;
      planned.spec = spec;
      for (const auto& other : disjoint_from) check_disjoint(planned, read_manifest(other));
      const AssetPack pack = load_asset_pack(gen_pack);
      const auto m = generate_dataset(spec, pack, gen_out, jobs);
      const SeedRange r = spec.seed_range();
      std::printf("%s: %llu trials, seeds [%llu, %llu), digest %s\n", gen_out.c_str(), (unsigned long long)m.trial_count,
                  (unsigned long long)r.lo, (unsigned long long)r.hi, m.content_digest.c_str());
    } else if (*render) {
      CanvasConfig cfg = read_manifest(render_ds).spec.canvas;
      if (width) cfg.width = width;
      if (height) cfg.height = height;
      rerender_dataset(render_ds, load_asset_pack(render_pack), cfg);
      std::printf("re-rendered %s at %dx%d\n", render_ds.c_str(), cfg.width, cfg.height);
    } else if (*ev) {
      const auto mode = parse_eval_mode(mode_s);
      if (!mode) {
        std::cerr << "eval: unknown mode \"" << mode_s << "\"\n";
        return 2;
      }
      auto client = make_client(ep.endpoint());
      std::unique_ptr<ChatClient> ex;
      EvalConfig cfg;
      cfg.mode = *mode;
      cfg.parallelism = parallelism;
      cfg.answer_max_tokens = ep.max_tokens;
      cfg.caption_max_tokens = ep.caption_max_tokens;
      cfg.temperature = ep.temperature;
      cfg.retry.max_retries = ep.retries;
      if (!extractor.url.empty()) {
        ex = make_client(extractor.endpoint());
        cfg.extractor = ex.get();
      }
      const EvalSummary s = run_eval(eval_ds, *client, cfg, eval_out);
      std::printf("%s: %zu trials (%zu run now), %zu correct, %zu errored, %zu unscorable\n", eval_out.c_str(),
                  s.n_trials, s.requested, s.correct, s.errored, s.unscorable);
    } else if (*sc) {
      ScoreOptions opts{exclude_errors};
      std::vector<ScoreTable> tables;
      for (const auto& d : score_dirs) {
        tables.push_back(score(d, opts));
        print_table(tables.back());
      }
      if (!report_out.empty()) emit_report(tables, std::nullopt, report_out, stem);
    } else if (*cmp) {
      ScoreOptions opts{exclude_errors};
      const ScoreTable a = score(base_dir, opts), b = score(variant_dir, opts);
      const DeltaTable d = compare_runs(a, b);
      std::printf("%s vs %s\n", d.variant_name.c_str(), d.base_name.c_str());
      for (const auto& r : d.rows) {
        std::printf("  %-16s %7.2f -> %7.2f  %s\n", r.label.c_str(), r.base_pct, r.variant_pct, r.format().c_str());
      }
      if (!report_out.empty()) emit_report({a, b}, d, report_out, stem);
    } else if (*sft) {
      for (const auto& f : export_sft(sft_ds, sft_out, shard)) std::printf("%s\n", f.c_str());
    } else if (*serve) {
      std::map<std::string, fs::path> datasets;
      for (const auto& d : serve_datasets) {
        const auto eq = d.find('=');
        if (eq == std::string::npos) {
          datasets[fs::path(d).filename().string()] = d;
        } else {
          datasets[d.substr(0, eq)] = d.substr(eq + 1);
        }
      }
      SessionStore store(sessions_dir, datasets);
      HttpService svc(store, ui_dir.empty() ? std::nullopt : std::optional<fs::path>(ui_dir));
      const int bound = svc.bind(host, port);
      std::printf("listening on http://%s:%d\n", host.c_str(), bound);
      std::fflush(stdout);
      serve_until_signal(svc);
    } else if (*sr) {
      std::vector<fs::path> logs;
      for (const auto& e : fs::directory_iterator(sr_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") logs.push_back(e.path());
      }
      std::sort(logs.begin(), logs.end());
      const ScoreTable t = session_report(logs, include_partial);
      print_table(t);
      if (!report_out.empty()) emit_report({t}, std::nullopt, report_out, stem);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
