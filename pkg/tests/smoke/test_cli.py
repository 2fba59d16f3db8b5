# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import json
import os

import numpy as np
import pandas as pd
import pytest

from utils_spde.cli.commands import cmd_oracle
from utils_spde.cli.records import FITS_FILE, RECORD_FILE, RunRecord, load_record
from utils_spde.cli.runner import build_parser, main
from utils_spde.common.config import ExperimentConfig
from utils_spde.spectral.basis import exact_basis_interval
from utils_spde.spectral.grid import Grid1D

TINY = ["--cells", "32", "--modes", "16", "--t", "0.05,0.1", "--dt", "5e-3", "--seed", "7"]
SIM_TIMES = ["--t", "0.025,0.05,0.075,0.1"]


def _run_dirs(out):
    return sorted(os.path.join(out, name) for name in os.listdir(out))


def _oracle_config(path, out, **model):
    data = {
        "model": model,
        "grid": {"n_cells": 32, "n_modes": 16},
        "dynamics": {"lambdas": [0.5, 1.0], "times": [0.05, 0.1]},
        "oracle": {"oracle_dt": 5e-3, "n_max": 3, "rho_list": [0.5, 1.0]},
        "output": {"output_dir": out},
    }
    with open(path, "w") as f:
        json.dump(data, f)
    return path


def test_parser_lists():
    args = build_parser().parse_args(["simulate", "--lambda", "0.5,5", "--p", "2,4,6"])
    assert args.lambdas == (0.5, 5.0)
    assert args.p_list == (2, 4, 6)
    assert args.verbose is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate", "--lambda", "a,b"])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["train"])


@pytest.mark.smoke
def test_basis(tmp):
    assert main(["basis", "--out", tmp] + TINY) == 0
    (run_dir,) = _run_dirs(tmp)
    assert os.path.basename(run_dir).startswith("basis-")
    basis = pd.read_csv(os.path.join(run_dir, "basis.csv"))
    assert len(basis) > 0
    record = load_record(run_dir)
    assert record["command"] == "basis"
    assert record["error"] is None
    assert "spectral_gap" in record["fits"]
    assert os.path.exists(os.path.join(run_dir, "run.log"))


@pytest.mark.smoke
def test_simulate(tmp):
    args = ["simulate", "--out", tmp, "--paths", "200", "--lambda", "0.5,1"] + TINY + SIM_TIMES
    assert main(args) == 0
    (run_dir,) = _run_dirs(tmp)
    moments = pd.read_csv(os.path.join(run_dir, "moments.csv"))
    assert set(moments["lambda"]) == {0.5, 1.0}
    assert set(moments["p"]) == {2, 4}
    record = load_record(run_dir)
    assert record["seed"] == 7
    assert record["fits"]["blow_up"] == {"0.5": 0, "1.0": 0}
    assert {"moments.csv", "fits.json", "moments.svg", "rates.svg", FITS_FILE} <= set(
        record["files"]
    )
    assert list(record["timing"])[:2] == ["setup", "simulate"]


@pytest.mark.smoke
def test_simulate_rerun_is_reproducible(tmp):
    args = ["simulate", "--out", tmp, "--paths", "200"] + TINY
    assert main(args) == 0
    assert main(args) == 0
    first, second = _run_dirs(tmp)
    assert first.endswith("-0") and second.endswith("-1")
    assert load_record(first)["files"] == load_record(second)["files"]


@pytest.mark.smoke
def test_manifest_matches_files(tmp):
    assert main(["basis", "--out", tmp] + TINY) == 0
    (run_dir,) = _run_dirs(tmp)
    config = ExperimentConfig.from_json(os.path.join(run_dir, "config.json"))
    record = RunRecord(run_dir, "basis", config)
    record.files = load_record(run_dir)["files"]
    assert record.verify_manifest()


@pytest.mark.smoke
@pytest.mark.parametrize("noise", ["white", "riesz:0.5"])
def test_oracle(tmp, noise):
    config_path = _oracle_config(os.path.join(tmp, "oracle.json"), tmp + "/runs", noise=noise)
    assert main(["oracle", "--config", config_path]) == 0
    (run_dir,) = _run_dirs(tmp + "/runs")
    for name in ["second_moment_lambda0.5.csv", "chaos.csv", "simplex.csv", "gronwall.json"]:
        assert os.path.exists(os.path.join(run_dir, name))
    chaos = pd.read_csv(os.path.join(run_dir, "chaos.csv"))
    assert sorted(set(chaos["n"])) == [0, 1, 2, 3]
    with open(os.path.join(run_dir, "gronwall.json")) as f:
        reports = json.load(f)
    assert len(reports) == 4
    assert all(r["max_residual"] <= 1e-6 for r in reports)
    second = pd.read_csv(os.path.join(run_dir, "second_moment_lambda1.0.csv"))
    assert sorted(set(second["t"])) == pytest.approx([0.0, 0.05, 0.1])
    assert (second["second_moment"] > 0).all()


@pytest.mark.smoke
def test_oracle_pinched_sigma(tmp):
    config = ExperimentConfig(
        n_cells=32,
        n_modes=16,
        sigma="pinched:0.5,2",
        times=(0.1,),
        n_max=2,
        rho_list=(1.0,),
        output_dir=tmp,
    ).validate()
    record = cmd_oracle(config)
    lower = pd.read_csv(record.path("second_moment_lambda1.0_lower.csv"))
    upper = pd.read_csv(record.path("second_moment_lambda1.0_upper.csv"))
    assert (lower["second_moment"] <= upper["second_moment"] + 1e-12).all()


@pytest.mark.smoke
def test_certify(tmp):
    assert main(["certify", "--out", tmp] + TINY) == 0
    (run_dir,) = _run_dirs(tmp)
    summary = pd.read_csv(os.path.join(run_dir, "certification_summary.csv"))
    assert set(summary["quantity"]) >= {"p1", "p2", "p11", "p22", "kernel_sandwich"}
    frame = pd.read_csv(os.path.join(run_dir, "certification.csv"))
    assert {"quantity", "t", "x", "value", "fitted_constant"} <= set(frame.columns)


@pytest.mark.smoke
@pytest.mark.parametrize(
    "flags",
    [
        ["--alpha", "2.5"],
        ["--noise", "pink"],
        ["--noise", "riesz:1.5", "--alpha", "1.2"],
        ["--modes", "64"],
        ["--eps", "0.75"],
    ],
)
def test_invalid_config_exit_code(tmp, flags):
    assert main(["basis", "--out", tmp, "--cells", "32"] + flags) == 2
    assert not os.path.exists(tmp) or _run_dirs(tmp) == []


@pytest.mark.smoke
def test_additive_oracle_fails_with_record(tmp):
    assert main(["oracle", "--out", tmp, "--sigma", "additive"] + TINY) == 2
    (run_dir,) = _run_dirs(tmp)
    with open(os.path.join(run_dir, RECORD_FILE)) as f:
        assert json.load(f)["error"]["type"] == "InvalidArgument"


@pytest.mark.smoke
def test_simulate_without_noise_follows_semigroup(tmp):
    args = ["simulate", "--out", tmp, "--paths", "100", "--lambda", "0", "--u0", "phi1"]
    assert main(args + TINY) == 0
    (run_dir,) = _run_dirs(tmp)
    basis = exact_basis_interval(16, Grid1D(32))
    moments = pd.read_csv(os.path.join(run_dir, "moments.csv"))
    rows = moments[(moments["aggregate"] == "point") & (moments["p"] == 2)]
    k = np.rint((rows["x"].values * 32 + 31) / 2).astype(int)
    expected = np.exp(-2 * basis.mu[0] * rows["t"].values) * basis.phi[0][k] ** 2
    np.testing.assert_allclose(rows["estimate"].values, expected, rtol=1e-10, atol=1e-14)


@pytest.mark.smoke
def test_oracle_without_noise_and_simplex_table(tmp):
    config = ExperimentConfig(
        n_cells=32,
        n_modes=16,
        u0="phi1",
        lambdas=(0.0,),
        times=(0.05, 0.1),
        n_max=2,
        rho_list=(0.5,),
        output_dir=tmp,
    ).validate()
    record = cmd_oracle(config)
    basis = exact_basis_interval(16, Grid1D(32))
    second = pd.read_csv(record.path("second_moment_lambda0.0.csv"))
    k = np.rint((second["x"].values * 32 + 31) / 2).astype(int)
    expected = np.exp(-2 * basis.mu[0] * second["t"].values) * basis.phi[0][k] ** 2
    np.testing.assert_allclose(second["second_moment"].values, expected, rtol=1e-10, atol=1e-14)
    simplex = pd.read_csv(record.path("simplex.csv"))
    row = simplex[(simplex["n"] == 1) & (simplex["a_over_alpha"] == 0.5)]
    row = row[row["b_over_alpha"] == 0.5]
    assert row["value"].iloc[0] == pytest.approx(np.pi, abs=1e-10)
    with open(record.path("gronwall.json")) as f:
        assert all(report["window_ok"] for report in json.load(f))
