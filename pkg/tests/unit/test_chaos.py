# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import numpy as np
import pytest
from scipy.special import factorial

from utils_spde.common.exceptions import InvalidArgument, SeriesOverflow
from utils_spde.secondmoment.chaos import (
    chaos_series_bounds,
    chaos_series_log_terms,
    fit_chaos_constants,
    log_simplex_integral,
    simplex_integral,
    simplex_integral_mc,
)
from utils_spde.secondmoment.kernels import uniform_grid
from utils_spde.secondmoment.volterra import picard_chaos_terms


@pytest.mark.parametrize(
    "n, a, b, t, expected",
    [
        (0, 0.0, 0.5, 2.0, 1.0),
        (0, 0.5, 0.0, 4.0, 0.5),
        (1, 0.0, 0.5, 1.0, 2.0),
        (1, 0.5, 0.5, 1.0, np.pi),
        (2, 0.0, 0.0, 3.0, 4.5),
        (3, 0.0, 0.0, 1.0, 1.0 / 6.0),
    ],
)
def test_simplex_integral_values(n, a, b, t, expected):
    assert simplex_integral(n, a, b, t) == pytest.approx(expected, rel=1e-12)


def test_simplex_integral_arguments():
    for a, b in [(1.0, 0.0), (0.0, 1.0), (-0.1, 0.0)]:
        with pytest.raises(InvalidArgument):
            simplex_integral(1, a, b, 1.0)
    with pytest.raises(InvalidArgument):
        simplex_integral(-1, 0.0, 0.0, 1.0)
    with pytest.raises(InvalidArgument):
        simplex_integral(1, 0.0, 0.0, 0.0)


def test_log_simplex_integral_large_order():
    value = log_simplex_integral(200, 0.25, 0.5, 10.0)
    assert np.isfinite(value)
    assert value < 0
    assert simplex_integral(200, 0.25, 0.5, 10.0) == pytest.approx(np.exp(value), rel=1e-12)


def test_simplex_integral_monte_carlo():
    rng = np.random.default_rng(11)
    estimate, stderr = simplex_integral_mc(2, 0.25, 0.25, 1.0, 10 ** 6, rng)
    exact = simplex_integral(2, 0.25, 0.25, 1.0)
    assert abs(estimate - exact) <= 4 * stderr
    assert stderr < 0.01 * exact
    with pytest.raises(InvalidArgument):
        simplex_integral_mc(0, 0.25, 0.25, 1.0, 100, rng)


def test_chaos_log_terms():
    terms = chaos_series_log_terms(1.0, 1.0, 2.0, 1.0, 0.0, 1.0, 4)
    assert terms[0] == 0.0
    np.testing.assert_allclose(
        np.exp(terms), [1.0 / np.sqrt(factorial(n)) for n in range(5)], rtol=1e-12
    )
    shifted = chaos_series_log_terms(2.0, 1.0, 2.0, 1.0, 0.0, 3.0, 4, mu1=1.0)
    np.testing.assert_allclose(
        shifted - terms, np.arange(5) * np.log(4.0 * 3.0) - 2.0, rtol=1e-12, atol=1e-12
    )
    with pytest.raises(InvalidArgument):
        chaos_series_log_terms(1.0, 1.0, 1.5, 1.5, 0.0, 1.0, 4)
    with pytest.raises(InvalidArgument):
        chaos_series_log_terms(1.0, 0.0, 2.0, 1.0, 0.0, 1.0, 4)


def test_chaos_bounds_without_noise():
    bounds = chaos_series_bounds(0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 6, c_low=0.5, c_high=2.0)
    assert bounds.lower == pytest.approx(0.5)
    assert bounds.upper == pytest.approx(2.0)
    assert bounds.n_terms == 7


def test_chaos_bounds_ordered():
    bounds = chaos_series_bounds(3.0, 2.0, 1.5, 0.5, 0.0, 0.5, 2.0, 8, mu1=2.0)
    assert bounds.lower < bounds.upper
    assert bounds.log_lower == pytest.approx(np.log(bounds.lower))


def test_chaos_bounds_overflow():
    bounds = chaos_series_bounds(1e30, 1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 8)
    assert bounds.lower is None and bounds.upper is None
    assert bounds.log_upper > 709
    with pytest.raises(SeriesOverflow):
        chaos_series_bounds(1e30, 1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 8, log=False)


def test_fit_chaos_constants_sandwich(small_exact_basis):
    t_grid = uniform_grid(0.5, 50)
    x = float(small_exact_basis.grid.nodes[15])
    mu1 = float(small_exact_basis.mu[0])
    terms = picard_chaos_terms(small_exact_basis, np.ones(32), 1.0, t_grid, 5, nodes=[x])
    constants = fit_chaos_constants(terms, 1.0, 2.0, 1.0, mu1=mu1, x=x)
    assert constants.C_low <= constants.C_high
    assert constants.c_low <= constants.c_high
    for lam in (1.0, 3.0):
        for i in (10, 25, 50):
            t = float(t_grid[i])
            total = sum(lam ** (2 * term.n) * term.values[i, 0] for term in terms)
            bounds = chaos_series_bounds(
                lam,
                t,
                2.0,
                1.0,
                0.0,
                constants.C_low,
                constants.C_high,
                5,
                constants.c_low,
                constants.c_high,
                mu1=mu1,
            )
            assert bounds.lower <= total * (1 + 1e-9)
            assert total <= bounds.upper * (1 + 1e-9)


def test_fit_chaos_constants_arguments(small_exact_basis):
    t_grid = uniform_grid(0.5, 50)
    terms = picard_chaos_terms(small_exact_basis, np.ones(32), 1.0, t_grid, 2)
    with pytest.raises(InvalidArgument):
        fit_chaos_constants(terms[:1], 1.0, 2.0, 1.0)
    with pytest.raises(InvalidArgument):
        fit_chaos_constants(terms, 1.0, 2.0, 1.0, times=[0.0])
