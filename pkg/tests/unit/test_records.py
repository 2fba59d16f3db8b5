# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import json
import os
from collections import namedtuple

import jsonlines
import numpy as np
import pytest

from utils_spde import VERSION
from utils_spde.cli.records import (
    CONFIG_FILE,
    FITS_FILE,
    RECORD_FILE,
    RunRecord,
    config_digest,
    load_record,
    make_run_dir,
    sha256_of,
)
from utils_spde.common.config import ExperimentConfig
from utils_spde.common.exceptions import PropertyViolation

Fit = namedtuple("Fit", ["rate", "window"])


def test_sha256_of(tmp):
    path = os.path.join(tmp, "empty")
    open(path, "w").close()
    assert sha256_of(path) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_config_digest():
    config = ExperimentConfig()
    assert config_digest(config) == config_digest(ExperimentConfig())
    assert config_digest(config) != config_digest(config.with_overrides(seed=1))
    assert len(config_digest(config)) == 12


def test_make_run_dir_counts_runs(tmp):
    config = ExperimentConfig()
    first = make_run_dir(tmp, "basis", config)
    second = make_run_dir(tmp, "basis", config)
    assert first != second
    assert first.endswith("-0") and second.endswith("-1")
    assert os.path.basename(first).startswith("basis-" + config_digest(config))


def test_record_keeps_stage_order(tmp):
    config = ExperimentConfig()
    record = RunRecord(make_run_dir(tmp, "simulate", config), "simulate", config)
    for name in ("setup", "simulate", "estimate", "fit", "simulate"):
        with record.timing.stage(name):
            pass
    record.save()
    assert list(load_record(record.run_dir)["timing"]) == ["setup", "simulate", "estimate", "fit"]


def test_record_round_trip(tmp):
    config = ExperimentConfig(seed=5)
    record = RunRecord(make_run_dir(tmp, "simulate", config), "simulate", config)
    with record.timing.stage("fit"):
        record.add_fit("lyapunov", Fit(np.float64(1.5), (0.1, 1.0)))
        record.add_fit("counts", {1.0: np.int64(3)})
        record.add_fit("ratio", float("inf"))
    record.save()

    data = load_record(record.run_dir)
    assert data["command"] == "simulate"
    assert data["seed"] == 5
    assert data["version"] == VERSION
    assert data["config"] == config.to_dict()
    assert data["fits"]["lyapunov"] == {"rate": 1.5, "window": [0.1, 1.0]}
    assert data["fits"]["counts"] == {"1.0": 3}
    assert data["fits"]["ratio"] == "inf"
    assert list(data["timing"]) == ["fit"]
    assert set(data["files"]) == {CONFIG_FILE, FITS_FILE}
    assert data["error"] is None
    with jsonlines.open(record.path(FITS_FILE)) as reader:
        assert [line["name"] for line in reader] == ["lyapunov", "counts", "ratio"]
    with open(record.path(CONFIG_FILE)) as f:
        assert json.load(f) == config.to_dict()


def test_record_failure(tmp):
    config = ExperimentConfig()
    record = RunRecord(tmp, "oracle", config)
    record.fail(PropertyViolation("residual too large"))
    record.save()
    with open(os.path.join(tmp, RECORD_FILE)) as f:
        error = json.load(f)["error"]
    assert error == {"type": "PropertyViolation", "message": "residual too large"}


def test_verify_manifest(tmp):
    config = ExperimentConfig()
    record = RunRecord(tmp, "basis", config)
    with open(record.path("basis.csv"), "w") as f:
        f.write("n,mu\n1,2.4\n")
    record.add_file("basis.csv")
    assert record.verify_manifest()
    with open(record.path("basis.csv"), "a") as f:
        f.write("2,9.8\n")
    with pytest.raises(PropertyViolation):
        record.verify_manifest()
    os.remove(record.path("basis.csv"))
    with pytest.raises(PropertyViolation):
        record.verify_manifest()
