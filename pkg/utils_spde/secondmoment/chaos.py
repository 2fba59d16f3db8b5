# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Chaos-expansion machinery: simplex integrals and the two-sided chaos series."""

import logging
from collections import namedtuple

import numpy as np
from scipy.special import gammaln, logsumexp

from utils_spde.common.exceptions import InvalidArgument, SeriesOverflow

logger = logging.getLogger(__name__)

LOG_FLOAT_MAX = np.log(np.finfo(float).max)

ChaosSeriesBounds = namedtuple(
    "ChaosSeriesBounds", ["lower", "upper", "log_lower", "log_upper", "n_terms"]
)
ChaosConstants = namedtuple("ChaosConstants", ["C_low", "C_high", "c_low", "c_high"])


def _check_exponent(name, value):
    if not 0.0 <= value < 1.0:
        raise InvalidArgument("{} must lie in [0, 1), got {}".format(name, value))


def log_simplex_integral(n, a_over_alpha, b_over_alpha, t):
    """Logarithm of `simplex_integral`."""
    _check_exponent("a_over_alpha", a_over_alpha)
    _check_exponent("b_over_alpha", b_over_alpha)
    if n < 0 or t <= 0:
        raise InvalidArgument("Need n >= 0 and t > 0, got n={}, t={}".format(n, t))
    a, b = a_over_alpha, b_over_alpha
    return (
        n * gammaln(1.0 - b)
        + gammaln(1.0 - a)
        - gammaln(n * (1.0 - b) + 1.0 - a)
        + (n * (1.0 - b) - a) * np.log(t)
    )


def simplex_integral(n, a_over_alpha, b_over_alpha, t):
    """Integral over 0 < t_1 < ... < t_n < t of (t - t_n)^-a prod_i (t_i - t_{i-1})^-b, t_0 = 0.

    The gaps form a Dirichlet integral:
    Gamma(1-b)^n Gamma(1-a) t^(n(1-b) - a) / Gamma(n(1-b) + 1 - a).

    Args:
        n (int): Dimension of the simplex.
        a_over_alpha (float): Exponent a in [0, 1) of the last gap.
        b_over_alpha (float): Exponent b in [0, 1) of the inner gaps.
        t (float): Upper vertex, positive.

    Returns:
        float: The integral.

    Raises:
        InvalidArgument: If an exponent is outside [0, 1) (non-integrable).
    """
    return float(np.exp(log_simplex_integral(n, a_over_alpha, b_over_alpha, t)))


def simplex_integral_mc(n, a_over_alpha, b_over_alpha, t, n_samples, rng):
    """Monte Carlo estimate of `simplex_integral` from sorted uniform samples.

    Args:
        n (int): Dimension, at least 1.
        a_over_alpha (float): Exponent of the last gap.
        b_over_alpha (float): Exponent of the inner gaps.
        t (float): Upper vertex.
        n_samples (int): Number of points.
        rng (numpy.random.Generator): Source of uniforms.

    Returns:
        tuple: (estimate, standard error).
    """
    _check_exponent("a_over_alpha", a_over_alpha)
    _check_exponent("b_over_alpha", b_over_alpha)
    if n < 1 or n_samples < 2:
        raise InvalidArgument("Need n >= 1 and at least 2 samples")
    points = np.sort(rng.random((n_samples, n)), axis=1) * t
    gaps = np.diff(points, axis=1, prepend=0.0)
    log_f = -b_over_alpha * np.log(gaps).sum(axis=1) - a_over_alpha * np.log(t - points[:, -1])
    volume = np.exp(n * np.log(t) - gammaln(n + 1))
    values = np.exp(log_f) * volume
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(n_samples))


def chaos_series_log_terms(lam, t, alpha, beta, a, C, n_max, mu1=None):
    """log of lam^(2n) C^n (n!)^(beta/alpha - 1) t^(n(1 - beta/alpha)) [t^(-a/alpha) for n >= 1].

    Returns:
        numpy.ndarray: n_max + 1 log terms, times e^{-2 mu1 t} when mu1 is given.
    """
    ratio = beta / alpha
    if not ratio < 1.0:
        raise InvalidArgument("Need beta / alpha < 1, got {}".format(ratio))
    if t <= 0 or C <= 0 or lam < 0:
        raise InvalidArgument("Need t > 0, C > 0 and lam >= 0")
    n = np.arange(n_max + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_lam2 = 2.0 * np.log(lam) if lam > 0 else -np.inf
    log_terms = (ratio - 1.0) * gammaln(n + 1.0) + n * (np.log(C) + (1.0 - ratio) * np.log(t))
    log_terms[1:] += n[1:] * log_lam2 - (a / alpha) * np.log(t)
    if mu1 is not None:
        log_terms -= 2.0 * mu1 * t
    return log_terms


def chaos_series_bounds(
    lam, t, alpha, beta, a, C_low, C_high, n_max, c_low=1.0, c_high=1.0, mu1=None, log=True
):
    """Partial sums of the lower and upper chaos series of E|u_t(x)|^2.

    Args:
        lam (float): Noise level.
        t (float): Time, positive.
        alpha (float): Stability index.
        beta (float): Correlation exponent (1 for white noise in d = 1).
        a (float): Exponent of the last simplex gap, 0 for the plain series.
        C_low (float): Geometric constant of the lower series.
        C_high (float): Geometric constant of the upper series.
        n_max (int): Last order summed.
        c_low (float, optional): Prefactor of the lower series.
        c_high (float, optional): Prefactor of the upper series.
        mu1 (float, optional): First eigenvalue; multiplies both sides by e^{-2 mu1 t}.
        log (bool, optional): Leave `lower` and `upper` as None when they overflow
            instead of raising.

    Returns:
        ChaosSeriesBounds: Linear and log partial sums.

    Raises:
        SeriesOverflow: If a linear sum overflows and log is False.
    """
    log_lower = float(
        np.log(c_low) + logsumexp(chaos_series_log_terms(lam, t, alpha, beta, a, C_low, n_max, mu1))
    )
    log_upper = float(
        np.log(c_high)
        + logsumexp(chaos_series_log_terms(lam, t, alpha, beta, a, C_high, n_max, mu1))
    )
    linear = []
    for value in (log_lower, log_upper):
        if value > LOG_FLOAT_MAX:
            if not log:
                raise SeriesOverflow("Chaos series overflows: log value {:.1f}".format(value))
            linear.append(None)
        else:
            linear.append(float(np.exp(value)))
    return ChaosSeriesBounds(linear[0], linear[1], log_lower, log_upper, n_max + 1)


def fit_chaos_constants(terms, lam, alpha, beta, a=0.0, mu1=None, x=0.0, times=None):
    """Fits the constants that make both chaos series sandwich the Picard terms term by term.

    Args:
        terms (list): ChaosTerm list of one solve, n = 0..n_max.
        lam (float): Noise level of that solve; the terms scale as lam^(2n).
        alpha (float): Stability index.
        beta (float): Correlation exponent (1 for white noise).
        a (float, optional): Exponent of the last simplex gap.
        mu1 (float, optional): First eigenvalue, as in `chaos_series_bounds`.
        x (float, optional): Node of the fit.
        times (list, optional): Positive times of the fit. Defaults to every positive grid time.

    Returns:
        ChaosConstants: C_low <= C_high and c_low <= c_high.
    """
    if len(terms) < 2:
        raise InvalidArgument("Need at least two chaos terms")
    grid_times = terms[0].times
    k = int(np.argmin(np.abs(terms[0].nodes - x)))
    if times is None:
        indices = np.flatnonzero(grid_times > 0)
    else:
        indices = np.array([int(np.argmin(np.abs(grid_times - s))) for s in times])
    log_c, log_C = [], []
    for i in indices:
        t = float(grid_times[i])
        base = chaos_series_log_terms(lam, t, alpha, beta, a, 1.0, len(terms) - 1, mu1)
        with np.errstate(divide="ignore"):
            log_d = np.log([term.values[i, k] for term in terms])
        if not np.all(np.isfinite(log_d)):
            raise InvalidArgument("Chaos terms must be positive at t={}".format(t))
        log_c.append(log_d[0] - base[0])
        log_C.append((log_d[1:] - base[1:], np.arange(1, len(terms))))
    c_low, c_high = float(np.exp(min(log_c))), float(np.exp(max(log_c)))
    low = min(np.min((r - np.log(c_low)) / n) for r, n in log_C)
    high = max(np.max((r - np.log(c_high)) / n) for r, n in log_C)
    constants = ChaosConstants(float(np.exp(low)), float(np.exp(high)), c_low, c_high)
    logger.info("Fitted chaos constants {}".format(constants))
    return constants
