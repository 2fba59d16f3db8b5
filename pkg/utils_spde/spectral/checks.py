# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Numerical checks of the eigen-estimates a basis is expected to satisfy."""

import logging
from collections import namedtuple

import numpy as np
from scipy import stats

from utils_spde.common.exceptions import InvalidArgument, PropertyViolation

logger = logging.getLogger(__name__)

MIN_MODES_FOR_GROWTH_FIT = 16
GROWTH_WINDOW_START = 4
GROWTH_WINDOW_FRACTION = 0.8

GrowthFit = namedtuple("GrowthFit", ["exponent", "c_low", "c_high", "window", "r2"])
EigenfunctionBound = namedtuple("EigenfunctionBound", ["c_fit", "ratio_min", "ratio_max"])


def check_eigenvalue_growth(basis):
    """Fits mu_n ~ n^(alpha/d) on the window n in [4, 0.8 N].

    The highest modes are left out since the grid resolves them poorly.

    Args:
        basis (SpectralBasis): Basis with at least 16 modes.

    Returns:
        GrowthFit: Fitted exponent, the min and max of mu_n / n^(alpha/d) over the
            window, the window itself and the r^2 of the fit.
    """
    n_modes = basis.n_modes
    if n_modes < MIN_MODES_FOR_GROWTH_FIT:
        raise InvalidArgument(
            "Growth fit needs at least {} modes, got {}".format(MIN_MODES_FOR_GROWTH_FIT, n_modes)
        )
    n_hi = int(np.floor(GROWTH_WINDOW_FRACTION * n_modes))
    n = np.arange(GROWTH_WINDOW_START, n_hi + 1)
    mu = basis.mu[n - 1]
    fit = stats.linregress(np.log(n), np.log(mu))
    normalized = mu / n ** (basis.alpha / basis.d)
    result = GrowthFit(
        exponent=float(fit.slope),
        c_low=float(normalized.min()),
        c_high=float(normalized.max()),
        window=(GROWTH_WINDOW_START, n_hi),
        r2=float(fit.rvalue ** 2),
    )
    logger.info(
        "Eigenvalue growth exponent {:.4f} (alpha={}), c in [{:.4g}, {:.4g}]".format(
            result.exponent, basis.alpha, result.c_low, result.c_high
        )
    )
    return result


def check_first_eigenfunction_bound(basis):
    """Two-sided comparison of phi_1 with (1 - |x|)^(alpha/2) on the grid nodes.

    Returns:
        EigenfunctionBound: c_fit = max over nodes of max(r, 1/r) with
            r = phi_1(x) / (1 - |x|)^(alpha/2).

    Raises:
        PropertyViolation: If phi_1 is not positive at every node.
    """
    phi1 = basis.phi[0]
    if np.any(phi1 <= 0):
        raise PropertyViolation("First eigenfunction is not positive at every interior node")
    ratio = phi1 / basis.grid.distance_to_boundary() ** (basis.alpha / 2.0)
    c_fit = float(max(ratio.max(), 1.0 / ratio.min()))
    return EigenfunctionBound(
        c_fit=c_fit, ratio_min=float(ratio.min()), ratio_max=float(ratio.max())
    )


def check_spectral_gap(basis):
    """Relative gap (mu_2 - mu_1) / mu_1."""
    if basis.n_modes < 2:
        raise InvalidArgument("The spectral gap needs at least two modes")
    return float((basis.mu[1] - basis.mu[0]) / basis.mu[0])
