"""Python access to the pambench core: generation, prompts, evaluation and scoring."""

import json as _json

from . import _pambench
from ._pambench import (
    GENERATOR_VERSION,
    DegenerateInput,
    EmptyResults,
    InvalidParams,
    MissingFile,
    NoData,
    PambenchError,
    SchemaError,
    binomial_se,
    export_sft,
    format_delta,
    format_score,
    pearson,
    synth_asset_pack,
)

__all__ = [
    "GENERATOR_VERSION", "PambenchError", "SchemaError", "InvalidParams", "MissingFile", "EmptyResults",
    "DegenerateInput", "NoData", "synth_asset_pack", "generate", "read_trial", "request_payload", "run_eval",
    "score", "session_report", "export_sft", "pearson", "binomial_se", "format_score", "format_delta",
]


def generate(out, pack, *, preset=None, spec=None, trials_per_task=5, seed_base=0, jobs=1, n_tasks=100):
    """Generate a dataset from a preset name or a spec dict; returns the manifest."""
    if (preset is None) == (spec is None):
        raise ValueError("pass exactly one of preset= or spec=")
    if preset is not None:
        text = _pambench.generate_preset(preset, trials_per_task, seed_base, str(pack), str(out), jobs, n_tasks)
    else:
        text = _pambench.generate_spec(_json.dumps(spec), str(pack), str(out), jobs)
    return _json.loads(text)


def read_trial(trial_dir):
    return _json.loads(_pambench.read_trial(str(trial_dir)))


def request_payload(trial_dir, mode="base", model="model", chain_of_thought=True):
    """The chat-completions request body the harness would send for this trial."""
    return _json.loads(_pambench.request_payload(str(trial_dir), mode, model, chain_of_thought))


def run_eval(dataset, out, mode="base", endpoint="mock:random", model="model", parallelism=4):
    return _json.loads(_pambench.run_eval(str(dataset), str(out), mode, endpoint, model, parallelism))


def score(results, exclude_errors=False):
    return _json.loads(_pambench.score(str(results), exclude_errors))


def session_report(logs, include_partial=False):
    return _json.loads(_pambench.session_report([str(p) for p in logs], include_partial))
