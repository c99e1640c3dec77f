import json
import subprocess

import jsonschema
import pytest

import pambench

KIND_COUNT = 22


def trial_dirs(root):
    return sorted(p.parent for p in root.glob("*/trial*/trial_meta.json"))


def test_generate_layout_and_schemas(dataset, schemas):
    root, manifest = dataset
    assert manifest["trial_count"] == 2 * KIND_COUNT
    assert manifest["seed_range"] == [0, 2 * KIND_COUNT]
    jsonschema.validate(manifest, schemas["manifest"])
    jsonschema.validate(json.loads((root / "manifest.json").read_text()), schemas["manifest"])
    dirs = trial_dirs(root)
    assert len(dirs) == 2 * KIND_COUNT
    for d in dirs:
        jsonschema.validate(json.loads((d / "trial_meta.json").read_text()), schemas["trial_meta"])
        jsonschema.validate(json.loads((d / "frames" / "new_task_info.json").read_text()), schemas["new_task_info"])


def test_read_trial(dataset):
    root, _ = dataset
    t = pambench.read_trial(root / "Mem-Loc-C" / "trial1")
    assert t["kind"] == "Mem-Loc-C"
    assert t["full"]
    assert t["answer"] in t["possible_answers"]
    assert len(t["frames"]) == len(t["captions"])
    assert t["frames"][0].endswith("epoch0.png")


def test_request_payload_modes(dataset):
    root, _ = dataset
    d = root / "Perc-Cat-R" / "trial0"
    base = pambench.request_payload(d, "base", model="m")
    assert base["model"] == "m"
    parts = base["messages"][0]["content"]
    images = [p for p in parts if p["type"] == "image_url"]
    assert images and all(p["image_url"]["url"].startswith("data:image/png;base64,") for p in images)
    pc = pambench.request_payload(d, "pc")
    assert all(p["type"] == "text" for p in pc["messages"][0]["content"])
    assert "Frame 1: " in "".join(p["text"] for p in pc["messages"][0]["content"])
    sft = pambench.request_payload(d, "base", chain_of_thought=False)
    assert sft["messages"][0]["content"][-1]["text"].endswith("Provide your answer here: ")
    # self-caption modes need the captioning pass first
    with pytest.raises(pambench.PambenchError):
        pambench.request_payload(d, "sc")
    with pytest.raises(pambench.InvalidParams):
        pambench.request_payload(d, "nonsense")


def test_eval_score_and_results(dataset, schemas, tmp_path):
    root, _ = dataset
    summary = pambench.run_eval(root, tmp_path / "res", mode="sc_i", endpoint="mock:random:4", parallelism=3)
    jsonschema.validate(summary, schemas["summary"])
    assert summary["n_trials"] == 2 * KIND_COUNT
    assert summary["errored"] == 0
    for f in (tmp_path / "res").glob("*/trial*.json"):
        jsonschema.validate(json.loads(f.read_text()), schemas["result"])
    table = pambench.score(tmp_path / "res")
    assert sum(c["n"] for c in table["tasks"]) == 2 * KIND_COUNT
    assert [g["label"] for g in table["groups"]][:2] == ["Percep. (Cat)", "Percep. (Loc)"]
    again = pambench.run_eval(root, tmp_path / "res", mode="sc_i", endpoint="mock:random:4")
    assert again["requested"] == 0
    assert again["correct"] == summary["correct"]


def test_export_sft(dataset, schemas, tmp_path):
    root, _ = dataset
    files = pambench.export_sft(root, tmp_path / "sft.json")
    records = json.loads(files[0].read_text())
    jsonschema.validate(records, schemas["sft"])
    assert len(records) == 2 * KIND_COUNT
    for r in records:
        assert r["messages"][0]["content"].count("<image>") == len(r["images"])
        for img in r["images"]:
            assert (tmp_path / img).is_file()
    shards = pambench.export_sft(root, tmp_path / "sharded.json", shard_size=10)
    assert [p.name for p in shards][0] == "sharded-00000.json"
    assert len(shards) == 5


def test_analysis_helpers():
    assert pambench.format_score(0.46, pambench.binomial_se(0.46, 50)) == "46.00±7.05"
    assert pambench.format_delta(28.666) == "+28.67"
    assert pambench.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    with pytest.raises(pambench.DegenerateInput):
        pambench.pearson([1, 1], [1, 2])
    with pytest.raises(pambench.NoData):
        pambench.session_report([])


def test_errors(tmp_path):
    with pytest.raises(ValueError):
        pambench.generate(tmp_path / "x", tmp_path)
    bad = tmp_path / "t" / "trial0"
    (bad / "frames").mkdir(parents=True)
    (bad / "frames" / "new_task_info.json").write_text("{not json")
    with pytest.raises(pambench.SchemaError):
        pambench.read_trial(bad)
    with pytest.raises(pambench.SchemaError):
        pambench.generate(tmp_path / "y", tmp_path, spec={"entries": [{"task": "No-Such-Kind", "n_trials": 1}]})


def test_spec_generation_matches_preset(pack, tmp_path):
    spec = {"dataset_id": "two", "seed_base": 500,
            "entries": [{"task": "CVR-Cat-M", "n_trials": 3}, {"task": "autotask:low", "n_tasks": 2, "n_trials": 2}]}
    a = pambench.generate(tmp_path / "a", pack, spec=spec)
    b = pambench.generate(tmp_path / "b", pack, spec=spec, jobs=3)
    assert a["trial_count"] == 7
    assert a["seed_range"] == [500, 507]
    assert a["content_digest"] == b["content_digest"]


def test_cli(cli, pack, tmp_path, schemas):
    def run(*args):
        return subprocess.run([cli, *map(str, args)], capture_output=True, text=True)

    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"entries": [{"task": "Att-Spa-C", "n_trials": 4}]}))
    r = run("generate", "--spec", spec, "--pack", pack, "--out", tmp_path / "ds", "--seed", 77)
    assert r.returncode == 0, r.stderr
    m = json.loads((tmp_path / "ds" / "manifest.json").read_text())
    assert m["seed_range"] == [77, 81]
    r = run("eval", "--dataset", tmp_path / "ds", "--out", tmp_path / "res", "--mode", "sc", "--endpoint", "mock:random")
    assert r.returncode == 0, r.stderr
    jsonschema.validate(json.loads((tmp_path / "res" / "summary.json").read_text()), schemas["summary"])
    r = run("export-sft", "--dataset", tmp_path / "ds", "--out", tmp_path / "sft.json")
    assert r.returncode == 0
    jsonschema.validate(json.loads((tmp_path / "sft.json").read_text()), schemas["sft"])
    assert run("generate", "--pack", pack).returncode == 2
    assert run("score", tmp_path / "ds").returncode == 1
