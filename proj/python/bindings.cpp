#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pambench/analysis.hpp"
#include "pambench/dataset.hpp"
#include "pambench/errors.hpp"
#include "pambench/harness.hpp"
#include "pambench/json_io.hpp"
#include "pambench/service.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/util.hpp"

namespace py = pybind11;
using namespace pambench;
namespace fs = std::filesystem;

namespace {

// Structured values cross the boundary as JSON text; the Python side parses it.
std::string table_json(const ScoreTable& t) {
  auto cell = [](const ScoreCell& c) {
    return Json{{"label", c.label}, {"n", c.n}, {"correct", c.correct}, {"accuracy_pct", 100.0 * c.p_hat()},
                {"se_pct", 100.0 * c.se()}, {"display", c.format()}};
  };
  Json groups = Json::array(), tasks = Json::array();
  for (const auto& c : t.groups) groups.push_back(cell(c));
  for (const auto& c : t.tasks) tasks.push_back(cell(c));
  return Json{{"name", t.name}, {"groups", groups}, {"tasks", tasks}}.dump();
}

EvalMode mode_of(const std::string& s) {
  auto m = parse_eval_mode(s);
  if (!m) throw InvalidParams("unknown mode \"" + s + "\"");
  return *m;
}

}  // namespace

PYBIND11_MODULE(_pambench, m) {
  m.doc() = "Native core of the pambench package";

  auto& base = py::register_exception<Error>(m, "PambenchError");  // must precede the subclasses
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<InvalidParams>(m, "InvalidParams", base.ptr());
  py::register_exception<MissingFile>(m, "MissingFile", base.ptr());
  py::register_exception<EmptyResults>(m, "EmptyResults", base.ptr());
  py::register_exception<DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<NoData>(m, "NoData", base.ptr());

  m.attr("GENERATOR_VERSION") = std::string(kGeneratorVersion);

  m.def("synth_asset_pack", [](std::uint64_t seed, const fs::path& out, int views) {
    py::gil_scoped_release nogil;
    return synth_asset_pack(seed, out, views).digest();
  }, py::arg("seed"), py::arg("out"), py::arg("views_per_object") = 4);

  m.def("generate_preset", [](const std::string& preset, int trials_per_task, std::uint64_t seed_base,
                              const fs::path& pack, const fs::path& out, int jobs, int n_tasks) {
    py::gil_scoped_release nogil;
    const DatasetSpec spec = dataset_preset(preset, trials_per_task, seed_base, n_tasks);
    return manifest_to_text(generate_dataset(spec, load_asset_pack(pack), out, jobs));
  }, py::arg("preset"), py::arg("trials_per_task"), py::arg("seed_base"), py::arg("pack"), py::arg("out"),
        py::arg("jobs") = 1, py::arg("n_tasks") = 100);

  m.def("generate_spec", [](const std::string& spec_text, const fs::path& pack, const fs::path& out, int jobs) {
    py::gil_scoped_release nogil;
    const DatasetSpec spec = spec_from_text(spec_text, "<spec>");
    return manifest_to_text(generate_dataset(spec, load_asset_pack(pack), out, jobs));
  }, py::arg("spec"), py::arg("pack"), py::arg("out"), py::arg("jobs") = 1);

  m.def("read_trial", [](const fs::path& dir) {
    const LoadedTrial lt = read_trial(dir);
    Json possible = Json::array();
    for (const auto& a : lt.trial.possible_answers) possible.push_back(to_string(a));
    Json frames = Json::array();
    for (const auto& f : lt.frames) frames.push_back(f.string());
    return Json{{"task", lt.trial.task},
                {"kind", lt.trial.kind ? Json(std::string(to_string(*lt.trial.kind))) : Json()},
                {"trial_id", lt.trial.trial_id},
                {"instruction", lt.trial.instruction},
                {"answer", to_string(lt.trial.answer)},
                {"possible_answers", possible},
                {"captions", lt.trial.captions},
                {"frames", frames},
                {"full", lt.trial.full()}}
        .dump();
  }, py::arg("trial_dir"));

  m.def("request_payload", [](const fs::path& dir, const std::string& mode, const std::string& model, bool cot) {
    const LoadedTrial lt = read_trial(dir);
    ChatRequest req;
    PromptOptions opts;
    opts.chain_of_thought = cot;
    req.messages = build_prompt(lt, mode_of(mode), std::nullopt, opts);
    return request_payload(req, model);
  }, py::arg("trial_dir"), py::arg("mode"), py::arg("model") = "model", py::arg("chain_of_thought") = true);

  m.def("run_eval", [](const fs::path& dataset, const fs::path& out, const std::string& mode,
                       const std::string& endpoint, const std::string& model, int parallelism) {
    py::gil_scoped_release nogil;
    ModelEndpoint ep;
    ep.base_url = endpoint;
    ep.model = model;
    auto client = make_client(ep);
    EvalConfig cfg;
    cfg.mode = mode_of(mode);
    cfg.parallelism = parallelism;
    return summary_to_text(run_eval(dataset, *client, cfg, out));
  }, py::arg("dataset"), py::arg("out"), py::arg("mode") = "base", py::arg("endpoint") = "mock:random",
        py::arg("model") = "model", py::arg("parallelism") = 4);

  m.def("score", [](const fs::path& results, bool exclude_errors) {
    return table_json(score(results, ScoreOptions{exclude_errors}));
  }, py::arg("results"), py::arg("exclude_errors") = false);

  m.def("session_report", [](const std::vector<fs::path>& logs, bool partial) {
    return table_json(session_report(logs, partial));
  }, py::arg("logs"), py::arg("include_partial") = false);

  m.def("export_sft", [](const fs::path& root, const fs::path& out, std::size_t shard) {
    return export_sft(root, out, shard);
  }, py::arg("dataset"), py::arg("out"), py::arg("shard_size") = kSftShardSize);

  m.def("pearson", [](const std::vector<double>& xs, const std::vector<double>& ys) { return pearson(xs, ys).r; });
  m.def("binomial_se", &binomial_se);
  m.def("format_score", &format_score);
  m.def("format_delta", &format_delta);
}
