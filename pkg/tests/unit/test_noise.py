# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import numpy as np
import pytest

from utils_spde.common.exceptions import InvalidArgument, NumericFailure
from utils_spde.common.rng import sub_stream
from utils_spde.noise.covariance import (
    SpatialCovariance,
    covariance_matrix,
    riesz_cell_average,
    sample_spatial_increment,
)
from utils_spde.noise.models import (
    CovarianceModel,
    NoiseKind,
    dalang_condition,
    hypothesis_h0_check,
    parse_model,
)
from utils_spde.spectral.grid import Grid1D


@pytest.mark.parametrize("spec", ["white", "riesz:0.5", "bessel:0.3", "frac:0.7"])
def test_parse_model_spec(spec):
    assert parse_model(spec).spec == spec


def test_parse_model_invalid():
    for spec in ["pink", "riesz", "riesz:x", "riesz:0.2,0.3", "white:1", "frac:0.4", "riesz:-1"]:
        with pytest.raises(InvalidArgument):
            parse_model(spec)


def test_scaling_exponent():
    assert parse_model("white").scaling_exponent == 1.0
    assert parse_model("riesz:0.25").scaling_exponent == 0.25
    with pytest.raises(InvalidArgument):
        parse_model("bessel:1").scaling_exponent


def test_dalang_condition():
    assert dalang_condition(parse_model("white"), 2.0, 1)
    assert not dalang_condition(parse_model("white"), 1.0, 1)
    assert dalang_condition(parse_model("riesz:0.5"), 1.5, 1)
    assert not dalang_condition(parse_model("riesz:1.7"), 1.5, 3)
    assert dalang_condition(parse_model("frac:0.6"), 1.5, 1)
    assert not dalang_condition(parse_model("frac:0.6,0.6"), 1.2, 2)
    assert dalang_condition(parse_model("bessel:0.5"), 1.5, 1)
    with pytest.raises(InvalidArgument):
        dalang_condition(parse_model("frac:0.6"), 1.5, 2)
    with pytest.raises(InvalidArgument):
        dalang_condition(parse_model("white"), 2.5, 1)


def test_hypothesis_h0():
    assert hypothesis_h0_check(parse_model("riesz:0.5"), 2.0)
    assert not hypothesis_h0_check(parse_model("riesz:1.2"), 2.0)
    assert not hypothesis_h0_check(parse_model("white"), 2.0)


def test_correlation():
    model = CovarianceModel(NoiseKind.RIESZ, beta=0.5)
    assert model.correlation(0.25) == pytest.approx(2.0)
    with pytest.raises(InvalidArgument):
        parse_model("white").correlation(0.25)


def test_riesz_cell_average():
    h = 0.01
    assert riesz_cell_average(0, h, 0.5) == pytest.approx(2.0 / 0.75 * h ** -0.5)
    assert riesz_cell_average(50, h, 0.5) == pytest.approx((50 * h) ** -0.5, rel=1e-3)
    with pytest.raises(InvalidArgument):
        riesz_cell_average(1, h, 1.0)


def test_white_covariance(white_cov, grid64):
    np.testing.assert_array_equal(white_cov.matrix, np.eye(64) / grid64.h)
    assert white_cov.jitter_applied == 0.0


def test_riesz_covariance(riesz_cov):
    assert np.array_equal(riesz_cov.matrix, riesz_cov.matrix.T)
    assert riesz_cov.eigenvalues[0] > 0
    assert np.all(np.diff(riesz_cov.matrix[0]) < 0)
    factor = riesz_cov.factor
    np.testing.assert_allclose(
        factor @ factor.T, riesz_cov.matrix, rtol=1e-8, atol=1e-8 * riesz_cov.norm
    )


def test_covariance_unsupported(grid64):
    with pytest.raises(InvalidArgument):
        covariance_matrix(grid64, parse_model("bessel:0.5"))
    with pytest.raises(InvalidArgument):
        covariance_matrix(grid64, parse_model("riesz:1.5"))


def test_covariance_rejects_asymmetric(grid64):
    matrix = np.eye(64)
    matrix[0, 1] = 1.0
    with pytest.raises(InvalidArgument):
        SpatialCovariance(grid64, matrix, parse_model("white"))


def test_modal_matrix_white(white_cov, exact_basis):
    np.testing.assert_allclose(white_cov.modal_matrix(exact_basis), np.eye(32), atol=1e-10)


def test_riesz_cell_average_second_order():
    beta, r = 0.5, 0.5
    errors = []
    for n in (20, 40, 80):
        h = 1.0 / n
        errors.append(riesz_cell_average(r / h, h, beta) - r ** -beta)
    errors = np.array(errors)
    assert np.all(errors > 0)
    np.testing.assert_allclose(errors[:-1] / errors[1:], 4.0, rtol=0.05)
    leading = beta * (beta + 1.0) / 12.0 * (1.0 / (80 * r)) ** 2 * r ** -beta
    assert errors[-1] == pytest.approx(leading, rel=0.01)


def test_sample_increment_moments(small_riesz_cov):
    n_draws, dt = 10 ** 5, 0.01
    samples = sample_spatial_increment(small_riesz_cov, sub_stream(11, 0), dt, size=n_draws)
    assert samples.shape == (n_draws, 32)
    expected = dt * small_riesz_cov.matrix
    variances = np.diag(expected)
    mean_se = np.sqrt(variances / n_draws)
    assert np.all(np.abs(samples.mean(axis=0)) <= 5 * mean_se)
    empirical = np.cov(samples, rowvar=False)
    cov_se = np.sqrt((np.outer(variances, variances) + expected ** 2) / n_draws)
    assert np.all(np.abs(empirical - expected) <= 5 * cov_se)


def test_singular_covariance_gets_jitter():
    grid = Grid1D(32)
    cov = SpatialCovariance(grid, np.ones((32, 32)), parse_model("riesz:0.5"))
    assert cov.jitter_applied > 0
    assert cov.jitter_applied == pytest.approx(1e-12)
    factor = cov.factor
    np.testing.assert_allclose(
        factor @ factor.T, cov.matrix + cov.jitter_applied * np.eye(32), atol=1e-10
    )


def test_indefinite_covariance_fails():
    matrix = np.eye(32)
    matrix[0, 0] = -1.0
    cov = SpatialCovariance(Grid1D(32), matrix, parse_model("riesz:0.5"))
    with pytest.raises(NumericFailure):
        cov.factor


def test_sample_increment_arguments(white_cov):
    rng = np.random.default_rng(0)
    assert sample_spatial_increment(white_cov, rng, 0.1).shape == (64,)
    with pytest.raises(InvalidArgument):
        sample_spatial_increment(white_cov, rng, 0.0)


def test_sample_increment_is_seeded(white_cov):
    first = sample_spatial_increment(white_cov, np.random.default_rng(7), 0.1, size=3)
    second = sample_spatial_increment(white_cov, np.random.default_rng(7), 0.1, size=3)
    np.testing.assert_array_equal(first, second)
    assert Grid1D(64) == white_cov.grid
