# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

# NOTE: This file is used by pytest to inject fixtures automatically.
# As it is explained in the documentation
# https://docs.pytest.org/en/latest/fixture.html:
# "If during implementing your tests you realize that you want to use
# a fixture function from multiple test files you can move it to a conftest.py
# file. You don't need to import the fixture you want to use in a test, it
# automatically gets discovered by pytest."

from tempfile import TemporaryDirectory

import numpy as np
import pytest

from utils_spde.common.config import ExperimentConfig
from utils_spde.noise.covariance import covariance_matrix
from utils_spde.noise.models import parse_model
from utils_spde.spectral.basis import build_basis, exact_basis_interval
from utils_spde.spectral.grid import Grid1D


def pytest_configure(config):
    config.addinivalue_line("markers", "smoke: end-to-end CLI runs on tiny configurations")
    config.addinivalue_line("markers", "integration: acceptance sweeps, minutes each")


@pytest.fixture()
def tmp(tmp_path_factory):
    td = TemporaryDirectory(dir=tmp_path_factory.getbasetemp())
    try:
        yield td.name
    finally:
        td.cleanup()


@pytest.fixture(scope="module")
def tmp_module(tmp_path_factory):
    td = TemporaryDirectory(dir=tmp_path_factory.getbasetemp())
    try:
        yield td.name
    finally:
        td.cleanup()


@pytest.fixture(scope="session")
def grid64():
    return Grid1D(64)


@pytest.fixture(scope="session")
def exact_basis(grid64):
    """alpha = 2, 32 sine modes on 64 cells."""
    return exact_basis_interval(32, grid64)


@pytest.fixture(scope="session")
def small_exact_basis():
    """alpha = 2, 16 sine modes on 32 cells."""
    return exact_basis_interval(16, Grid1D(32))


@pytest.fixture(scope="session")
def fractional_basis():
    """alpha = 1.5, 24 numeric modes on 128 cells."""
    return build_basis(1.5, Grid1D(128), 24)


@pytest.fixture(scope="session")
def white_cov(grid64):
    return covariance_matrix(grid64, parse_model("white"))


@pytest.fixture(scope="session")
def riesz_cov(grid64):
    return covariance_matrix(grid64, parse_model("riesz:0.5"))


@pytest.fixture(scope="session")
def small_riesz_cov():
    return covariance_matrix(Grid1D(32), parse_model("riesz:0.5"))


@pytest.fixture()
def ones64():
    return np.ones(64)


@pytest.fixture()
def tiny_config(tmp):
    """A configuration that simulates in well under a second."""
    return ExperimentConfig(
        n_cells=32,
        n_modes=16,
        n_paths=200,
        times=(0.05, 0.1),
        dt=5e-3,
        batch_size=64,
        output_dir=tmp,
    ).validate()
