import json
import os
import pathlib

import pytest

import pambench

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def schemas():
    d = ROOT / "docs" / "schemas"
    return {p.name.split(".")[0]: json.loads(p.read_text()) for p in d.glob("*.schema.json")}


@pytest.fixture(scope="session")
def pack(tmp_path_factory):
    out = tmp_path_factory.mktemp("pack") / "pack"
    pambench.synth_asset_pack(11, out, 2)
    return out


@pytest.fixture(scope="session")
def dataset(tmp_path_factory, pack):
    out = tmp_path_factory.mktemp("ds") / "hb"
    manifest = pambench.generate(out, pack, preset="human-baseline", trials_per_task=2, jobs=2)
    return out, manifest


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("PAMBENCH_CLI")
    if not exe:
        pytest.skip("PAMBENCH_CLI not set")
    return exe
