# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Calibration against the heat equation driven by a space-independent Brownian motion.

For du = Au dt + lam u dW_t with scalar W, every mode solves exactly:
a_n(t) = a_n(0) e^{-mu_n t} e^{lam W_t - lam^2 t / 2}, so
E|u_t|_2^2 = sum_n a_n(0)^2 e^{-2 mu_n t} e^{lam^2 t} and the growth rate tends to
lam^2 - 2 mu_{k0}, k0 the first mode present in u_0.
"""

import logging

import numpy as np
from scipy.special import logsumexp

from utils_spde.common.exceptions import InvalidArgument
from utils_spde.common.rng import sub_stream
from utils_spde.moments.fitting import fit_log_linear

logger = logging.getLogger(__name__)

CALIBRATION_STREAM = 7
COEFFICIENT_TOL = 1e-8


def leading_mode(coefficients, tol=COEFFICIENT_TOL):
    """Index (0-based) of the first coefficient above tol * max |a_n|."""
    magnitude = np.abs(np.asarray(coefficients))
    if not np.any(magnitude > 0):
        raise InvalidArgument("Initial condition has no component on the basis")
    return int(np.flatnonzero(magnitude > tol * magnitude.max())[0])


def calibration_target(basis, lam, u0_values):
    """Returns (lam^2 - 2 mu_{k0}, k0) with k0 1-based."""
    k0 = leading_mode(basis.project(u0_values))
    return lam ** 2 - 2.0 * float(basis.mu[k0]), k0 + 1


def _log_exponential_martingale_moment(lam, t_grid, method, n_paths, seed):
    """log E e^{2 lam W_t - lam^2 t} on t_grid, exactly or by Monte Carlo."""
    t_grid = np.asarray(t_grid, dtype=float)
    if method == "exact":
        return lam ** 2 * t_grid
    if method != "monte_carlo":
        raise InvalidArgument("method must be 'exact' or 'monte_carlo', got {}".format(method))
    rng = sub_stream(seed, CALIBRATION_STREAM)
    increments = np.sqrt(np.diff(np.concatenate([[0.0], t_grid])))
    brownian = np.cumsum(rng.standard_normal((n_paths, t_grid.size)) * increments, axis=1)
    exponent = 2.0 * lam * brownian - lam ** 2 * t_grid
    return logsumexp(exponent, axis=0) - np.log(n_paths)


def space_independent_calibration(
    basis, lam, u0_values, t_grid, n_paths=10000, method="exact", seed=0
):
    """Fits the growth rate of E|u_t|_2^2 for the space-independent noise.

    Args:
        basis (SpectralBasis): Eigenpairs of the generator.
        lam (float): Noise level.
        u0_values (numpy.ndarray): Initial datum on the grid.
        t_grid (array-like): At least 4 positive times.
        n_paths (int, optional): Paths of the Monte Carlo method.
        method (str, optional): "exact" uses E e^{2 lam W_t - lam^2 t} = e^{lam^2 t};
            "monte_carlo" samples W_t.
        seed (int, optional): Master seed of the Monte Carlo method.

    Returns:
        ExponentFit: Slope of log E|u_t|^2 against t over t_grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    coefficients = basis.project(u0_values)
    # projection round-off would otherwise dominate at large t
    coefficients[np.abs(coefficients) <= COEFFICIENT_TOL * np.abs(coefficients).max()] = 0.0
    with np.errstate(divide="ignore"):
        log_a2 = np.log(coefficients ** 2)
    log_semigroup = logsumexp(log_a2[None, :] - 2.0 * np.outer(t_grid, basis.mu), axis=1)
    log_norm = log_semigroup + _log_exponential_martingale_moment(
        lam, t_grid, method, n_paths, seed
    )
    fit = fit_log_linear(t_grid, log_norm)
    target, k0 = calibration_target(basis, lam, u0_values)
    logger.info(
        "Calibration lam={} ({}): rate {:.5g}, target {:.5g} (k0={})".format(
            lam, method, fit.rate, target, k0
        )
    )
    return fit
