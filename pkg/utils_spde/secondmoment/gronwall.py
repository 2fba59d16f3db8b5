# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Mittag-Leffler evaluation and numerical checks of the fractional Gronwall bounds.

The equality case of g(t) <= c1 + k int_0^t (t-s)^(rho-1) g(s) ds is
g(t) = c1 E_rho(k Gamma(rho) t^rho), which grows like exp((k Gamma(rho))^(1/rho) t).
"""

import json
import logging
from collections import namedtuple

import mpmath
import numpy as np
from scipy import integrate, special, stats

from utils_spde.common.exceptions import InvalidArgument, PropertyViolation, SeriesOverflow

logger = logging.getLogger(__name__)

ML_DIGITS = 30
RESIDUAL_TOL = 1e-6
N_CHECK_POINTS = 8
MIN_WINDOW_POINTS = 4
LOG_FLOAT_MAX = float(np.log(np.finfo(float).max))

GronwallReport = namedtuple(
    "GronwallReport",
    [
        "rho",
        "k",
        "c1",
        "direction",
        "c2_fit",
        "c3_fit",
        "rate",
        "window",
        "window_ok",
        "max_residual",
        "envelope_rate",
    ],
)


def _finish(log_value, log):
    if log:
        return log_value
    if log_value > LOG_FLOAT_MAX:
        raise SeriesOverflow("Mittag-Leffler value e^{:.1f} overflows".format(log_value))
    return float(np.exp(log_value))


def mittag_leffler_half(z, log=False):
    """E_{1/2}(z) = e^{z^2} erfc(-z) for z >= 0."""
    if z < 0:
        raise InvalidArgument("z must be nonnegative, got {}".format(z))
    return _finish(z * z + float(np.log(special.erfc(-z))), log)


def mittag_leffler(rho, z, log=False):
    """Mittag-Leffler function E_rho(z) = sum_k z^k / Gamma(rho k + 1).

    The series has positive terms for z >= 0 and is summed with mpmath until the terms
    have passed their peak and fall below the working precision.

    Args:
        rho (float): Index in (0, 1].
        z (float): Argument, nonnegative.
        log (bool, optional): Return log E_rho(z), which never overflows.

    Returns:
        float: E_rho(z), or its logarithm.

    Raises:
        InvalidArgument: If rho or z is out of range.
        SeriesOverflow: If the value exceeds the float range and log is False.
    """
    if not 0.0 < rho <= 1.0:
        raise InvalidArgument("rho must lie in (0, 1], got {}".format(rho))
    if z < 0:
        raise InvalidArgument("z must be nonnegative, got {}".format(z))
    if z == 0:
        return 0.0 if log else 1.0
    if rho == 1.0:
        return _finish(float(z), log)
    if rho == 0.5:
        return mittag_leffler_half(z, log)
    with mpmath.workdps(ML_DIGITS):
        log_z = mpmath.log(mpmath.mpf(z))
        tol = mpmath.mpf(10) ** (-ML_DIGITS)
        total = mpmath.mpf(0)
        previous = mpmath.mpf(0)
        k = 0
        while True:
            term = mpmath.exp(k * log_z - mpmath.loggamma(rho * k + 1))
            total += term
            if k > 0 and term < previous and term < tol * total:
                break
            previous = term
            k += 1
        return _finish(float(mpmath.log(total)), log)


def lower_bound_threshold(rho, k):
    """Start of the lower-bound window: (e / rho) (Gamma(rho) k)^(-1/rho), 0 for rho = 1/2."""
    if rho == 0.5:
        return 0.0
    return float(np.e / rho * (special.gamma(rho) * k) ** (-1.0 / rho))


def envelope_rate(rho, k):
    """Asymptotic growth rate (k Gamma(rho))^(1/rho) of the equality solution."""
    return float((k * special.gamma(rho)) ** (1.0 / rho))


def envelope_holds(rho, k, c1, times, log_g, direction):
    """Whether log g lies on the bound side of the closed-form envelope at every time.

    The envelope is (c1 / rho) e^{r t} from above and c1 e^{r t} from below, with
    r = envelope_rate(rho, k). Both constants are fixed in advance, not fitted.
    """
    times = np.asarray(times, dtype=float)
    log_g = np.asarray(log_g, dtype=float)
    rate = envelope_rate(rho, k)
    slack = 1e-9 * np.maximum(1.0, np.abs(log_g))
    if direction == "upper":
        return bool(np.all(log_g <= np.log(c1 / rho) + rate * times + slack))
    return bool(np.all(log_g >= np.log(c1) + rate * times - slack))


def equality_solution(rho, k, c1, times, log=False):
    """g(t) = c1 E_rho(k Gamma(rho) t^rho) on an array of times."""
    scale = k * special.gamma(rho)
    log_g = np.array(
        [np.log(c1) + mittag_leffler(rho, scale * t ** rho, log=True) for t in np.atleast_1d(times)]
    )
    return log_g if log else np.exp(log_g)


def integral_residual(rho, k, c1, t):
    """|1 - c1 / g(t) - k int_0^t (t-s)^(rho-1) g(s) / g(t) ds| for the equality solution."""
    log_gt = equality_solution(rho, k, c1, t, log=True)[0]

    def ratio(s):
        return np.exp(equality_solution(rho, k, c1, s, log=True)[0] - log_gt)

    integral, _ = integrate.quad(
        ratio, 0.0, t, weight="alg", wvar=(0.0, rho - 1.0), epsabs=1e-13, epsrel=1e-10, limit=200
    )
    return abs(1.0 - c1 * np.exp(-log_gt) - k * integral)


def gronwall_verify(rho, k, c1, t_grid, direction="upper", n_check=N_CHECK_POINTS):
    """Verifies the equality solution and fits the exponential Gronwall bound c2 e^{c3 k^(1/rho) t}.

    Args:
        rho (float): Kernel index in (0, 1].
        k (float): Kernel constant, positive.
        c1 (float): Constant term, positive.
        t_grid (array-like): Times; only positive ones are used.
        direction (str, optional): "upper" or "lower".
        n_check (int, optional): Number of residual checks.

    Returns:
        GronwallReport: Fitted constants, the growth rate of log g over the late half of
            the window, the largest residual and whether g respects the closed-form
            envelope (see envelope_holds) on the window.

    Raises:
        PropertyViolation: If the residual exceeds 1e-6 or the window has fewer than 4
            points.
    """
    if not 0.0 < rho <= 1.0 or k <= 0 or c1 <= 0:
        raise InvalidArgument("Need rho in (0, 1], k > 0 and c1 > 0")
    if direction not in ("upper", "lower"):
        raise InvalidArgument("direction must be 'upper' or 'lower', got {}".format(direction))
    times = np.asarray(t_grid, dtype=float)
    times = times[times > 0]
    if times.size == 0:
        raise PropertyViolation("No positive times in the grid")

    checks = np.geomspace(times.min(), times.max(), n_check)
    max_residual = max(integral_residual(rho, k, c1, t) for t in checks)
    if max_residual > RESIDUAL_TOL:
        raise PropertyViolation(
            "Equality solution residual {:.3g} exceeds {}".format(max_residual, RESIDUAL_TOL)
        )

    start = lower_bound_threshold(rho, k) if direction == "lower" else 0.0
    window = times[times > start]
    if window.size < MIN_WINDOW_POINTS:
        raise PropertyViolation(
            "Only {} grid points beyond t={:.4g} for the {} bound".format(
                window.size, start, direction
            )
        )
    log_g = equality_solution(rho, k, c1, window, log=True)
    late = window >= window[0] + 0.5 * (window[-1] - window[0])
    if late.sum() < 2:
        late = np.ones_like(window, dtype=bool)
    rate = float(stats.linregress(window[late], log_g[late]).slope)
    log_c2 = log_g - rate * window
    log_c2 = log_c2.max() if direction == "upper" else log_c2.min()
    window_ok = envelope_holds(rho, k, c1, window, log_g, direction)
    if not window_ok:
        logger.warning("Equality solution leaves the {} envelope on the window".format(direction))
    report = GronwallReport(
        rho=float(rho),
        k=float(k),
        c1=float(c1),
        direction=direction,
        c2_fit=float(np.exp(log_c2)),
        c3_fit=rate / k ** (1.0 / rho),
        rate=rate,
        window=(float(window[0]), float(window[-1])),
        window_ok=window_ok,
        max_residual=float(max_residual),
        envelope_rate=envelope_rate(rho, k),
    )
    logger.info(
        "Gronwall rho={}, k={}, {}: rate {:.5g}, c2 {:.4g}, residual {:.2g}".format(
            rho, k, direction, rate, report.c2_fit, max_residual
        )
    )
    return report


def save_report(report, path):
    """Writes a GronwallReport as JSON."""
    with open(path, "w") as f:
        json.dump(report._asdict(), f, indent=2, sort_keys=True)
    return path
