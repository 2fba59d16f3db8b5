# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Regression fits of Lyapunov exponents, excitation index and intermittency threshold."""

import logging
from collections import namedtuple

import numpy as np
from scipy import stats

from utils_spde.common.exceptions import FitUndefined, InvalidArgument
from utils_spde.moments.estimation import INF_D_EPS, POINT, SUP_D

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4
LOWER_WINDOW_FACTOR = 2.0

ExponentFit = namedtuple("ExponentFit", ["rate", "intercept", "r2", "window", "n_points"])
IndexFit = namedtuple("IndexFit", ["slope", "intercept", "r2", "lambdas"])

SIDES = {"upper": SUP_D, "lower": INF_D_EPS, "point": POINT}


def fit_log_linear(times, log_values, window=None):
    """Least squares of log_values against times on a window.

    Args:
        times (array-like): Times.
        log_values (array-like): Logarithms of the fitted quantity.
        window (tuple, optional): (t_lo, t_hi), inclusive. Defaults to all times.

    Returns:
        ExponentFit: Slope as `rate`.

    Raises:
        FitUndefined: With fewer than 4 points in the window or non-finite logs.
    """
    times = np.asarray(times, dtype=float)
    log_values = np.asarray(log_values, dtype=float)
    t_lo, t_hi = window if window is not None else (times.min(), times.max())
    inside = (times >= t_lo) & (times <= t_hi)
    if inside.sum() < MIN_FIT_POINTS:
        raise FitUndefined(
            "Need {} points in window [{}, {}], got {}".format(
                MIN_FIT_POINTS, t_lo, t_hi, int(inside.sum())
            )
        )
    if not np.all(np.isfinite(log_values[inside])):
        raise FitUndefined("Nonpositive or non-finite values in window [{}, {}]".format(t_lo, t_hi))
    fit = stats.linregress(times[inside], log_values[inside])
    return ExponentFit(
        rate=float(fit.slope),
        intercept=float(fit.intercept),
        r2=float(min(1.0, fit.rvalue ** 2)),
        window=(float(times[inside].min()), float(times[inside].max())),
        n_points=int(inside.sum()),
    )


def lower_window_start(t_lo, lam, alpha, a=1.0):
    """max(t_lo, 2 lam^(-2 alpha / (alpha - a))): start of the window where lower bounds hold.

    `a` is 1 for white noise and the scaling exponent of a colored covariance.
    """
    if lam <= 0:
        return t_lo
    return max(t_lo, LOWER_WINDOW_FACTOR * excitation_time_scale(alpha, a, lam))


def lyapunov_fit(table, p, lam, window=None, side="upper", alpha=None, x=None, a=1.0):
    """Fits log E|u_t|^p ~ rate * t on an aggregate of a moment table.

    Args:
        table (MomentTable): Estimates.
        p (int): Moment order.
        lam (float): Noise level.
        window (tuple, optional): (t_lo, t_hi). Defaults to all tabulated times.
        side (str, optional): "upper" (sup over D), "lower" (inf over D_eps) or "point".
        alpha (float, optional): Stability index; for the lower side the window then
            starts no earlier than 2 lam^(-2 alpha / (alpha - a)).
        x (float, optional): Node of a "point" fit.
        a (float, optional): Noise scaling exponent; 1 for white noise.

    Returns:
        ExponentFit: The fit.
    """
    if side not in SIDES:
        raise InvalidArgument("side must be one of {}, got {}".format(sorted(SIDES), side))
    rows = table.series(SIDES[side], p, lam, x=x)
    if rows.empty:
        raise FitUndefined("No rows for p={}, lambda={}, side={}".format(p, lam, side))
    times = rows["t"].values
    t_lo, t_hi = window if window is not None else (times.min(), times.max())
    if side == "lower" and alpha is not None:
        t_lo = lower_window_start(t_lo, lam, alpha, a=a)
    return fit_log_linear(times, rows["log_estimate"].values, (t_lo, t_hi))


def excitation_time_scale(alpha, a, lam):
    """lam^(-2 alpha / (alpha - a)): the time unit of the large-lambda growth."""
    if not a < alpha:
        raise InvalidArgument("Need a < alpha, got a={}, alpha={}".format(a, alpha))
    return lam ** (-2.0 * alpha / (alpha - a))


def excitation_index(rates, mu1, lambdas=None):
    """Log-log slope of the lambda-dependent part (rate + 2 mu_1) / 2 of p = 2 rates.

    Args:
        rates (dict): Noise level to fitted p = 2 Lyapunov rate.
        mu1 (float): First eigenvalue.
        lambdas (tuple, optional): (lam_lo, lam_hi) window of noise levels.

    Returns:
        IndexFit: The slope and its regression statistics.

    Raises:
        FitUndefined: With fewer than 4 noise levels or a nonpositive corrected rate.
    """
    items = sorted(rates.items())
    if lambdas is not None:
        items = [(lam, r) for lam, r in items if lambdas[0] <= lam <= lambdas[1]]
    if len(items) < MIN_FIT_POINTS:
        raise FitUndefined("Need {} noise levels, got {}".format(MIN_FIT_POINTS, len(items)))
    lams = np.array([lam for lam, _ in items], dtype=float)
    corrected = (np.array([r for _, r in items], dtype=float) + 2.0 * mu1) / 2.0
    if np.any(corrected <= 0) or np.any(lams <= 0):
        raise FitUndefined("Corrected rates must be positive: {}".format(corrected))
    fit = stats.linregress(np.log(lams), np.log(corrected))
    logger.info("Excitation index {:.4f} over lambda {}".format(fit.slope, list(lams)))
    return IndexFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), tuple(lams))


def critical_lambda(rates):
    """Noise level where the fitted rate changes sign, by linear interpolation.

    Args:
        rates (dict): Noise level to fitted Lyapunov rate.

    Returns:
        float: The first sign change from negative to nonnegative.
    """
    items = sorted(rates.items())
    for (lam_a, r_a), (lam_b, r_b) in zip(items[:-1], items[1:]):
        if r_a < 0 <= r_b:
            return float(lam_a + (lam_b - lam_a) * (-r_a) / (r_b - r_a))
    raise FitUndefined("Rates do not change sign over lambda {}".format([lam for lam, _ in items]))
