# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Two-sided closed-form bounds of the Dirichlet heat kernel and the fitting of their constants."""

import logging
from collections import namedtuple
from enum import Enum

import numpy as np

from utils_spde.common.exceptions import InvalidArgument, PropertyViolation

logger = logging.getLogger(__name__)

DEFAULT_C1 = 0.125
DEFAULT_C2 = 0.5


class Side(str, Enum):
    UPPER: str = "upper"
    LOWER: str = "lower"


class BoundConstants(namedtuple("BoundConstants", ["C", "c1", "c2"])):
    """Constants C >= 1 and c1 <= c2 of the kernel bounds."""

    __slots__ = ()

    def __new__(cls, C, c1=DEFAULT_C1, c2=DEFAULT_C2):
        if not C >= 1.0:
            raise InvalidArgument("C must be >= 1, got {}".format(C))
        if not 0.0 < c1 <= c2:
            raise InvalidArgument("Need 0 < c1 <= c2, got c1={}, c2={}".format(c1, c2))
        return super(BoundConstants, cls).__new__(cls, float(C), float(c1), float(c2))


def _prefactor(consts, side):
    side = Side(side)
    return (consts.C if side == Side.UPPER else 1.0 / consts.C), side


def bound_gaussian(ke, t, x, y, consts, side, d=1):
    """Kernel bound for alpha = 2.

    C^{+-1} min(1, phi_1(x) phi_1(y) / (1 ^ t)) e^{-mu_1 t} e^{-c |x-y|^2 / t} / (1 ^ t^{d/2}),
    with c = c1 for the upper and c2 for the lower side.
    """
    if ke.basis.alpha != 2.0:
        raise InvalidArgument("The Gaussian bound needs alpha = 2, got {}".format(ke.basis.alpha))
    scale, side = _prefactor(consts, side)
    phi1 = ke.basis.phi[0]
    product = phi1[ke.index(x)] * phi1[ke.index(y)]
    c = consts.c1 if side == Side.UPPER else consts.c2
    return float(
        scale
        * min(1.0, product / min(1.0, t))
        * np.exp(-ke.mu1 * t)
        * np.exp(-c * (x - y) ** 2 / t)
        / min(1.0, t ** (d / 2.0))
    )


def stable_spatial_factor(t, distance, alpha, d=1):
    """min(t^{-d/alpha}, t / |x-y|^{alpha+d}); the first branch when x = y."""
    near = t ** (-d / alpha)
    if distance == 0:
        return near
    return min(near, t / abs(distance) ** (alpha + d))


def bound_stable(ke, t, x, y, consts, side, d=1):
    """Kernel bound for 1 < alpha < 2.

    For t < 1: C^{+-1} e^{-mu_1 t} min(1, phi_1(x)/sqrt t) min(1, phi_1(y)/sqrt t) times
    `stable_spatial_factor`; for t >= 1: C^{+-1} e^{-mu_1 t} phi_1(x) phi_1(y).
    """
    alpha = ke.basis.alpha
    if not 1.0 < alpha < 2.0:
        raise InvalidArgument("The stable bound needs 1 < alpha < 2, got {}".format(alpha))
    scale, _ = _prefactor(consts, side)
    phi1 = ke.basis.phi[0]
    phi_x, phi_y = phi1[ke.index(x)], phi1[ke.index(y)]
    decay = scale * np.exp(-ke.mu1 * t)
    if t >= 1.0:
        return float(decay * phi_x * phi_y)
    root = np.sqrt(t)
    return float(
        decay
        * min(1.0, phi_x / root)
        * min(1.0, phi_y / root)
        * stable_spatial_factor(t, x - y, alpha, d)
    )


def bound_for(ke):
    """The bound family matching the basis: Gaussian for alpha = 2, stable otherwise."""
    return bound_gaussian if ke.basis.alpha == 2.0 else bound_stable


def fit_bound_constants(ke, times, nodes, c1=DEFAULT_C1, c2=DEFAULT_C2):
    """Smallest C making the bounds sandwich the kernel on a (t, x, y) lattice.

    Args:
        ke (KernelEvaluator): Kernel to bound.
        times (iterable): Lattice times, each at least ke.t_min.
        nodes (iterable): Lattice nodes (grid coordinates); all ordered pairs are used.
        c1 (float, optional): Exponent constant of the upper Gaussian bound.
        c2 (float, optional): Exponent constant of the lower Gaussian bound.

    Returns:
        BoundConstants: C = max(1, max p / upper_1, max lower_1 / p), where upper_1 and
            lower_1 are the bounds with C = 1.

    Raises:
        PropertyViolation: If the kernel is not positive on the lattice.
    """
    bound = bound_for(ke)
    unit = BoundConstants(1.0, c1, c2)
    worst = 1.0
    for t in times:
        for x in nodes:
            for y in nodes:
                p = ke.kernel_eval(t, x, y)
                if not p > 0:
                    raise PropertyViolation(
                        "Kernel is not positive at t={}, x={}, y={}: {}".format(t, x, y, p)
                    )
                upper = bound(ke, t, x, y, unit, Side.UPPER)
                lower = bound(ke, t, x, y, unit, Side.LOWER)
                worst = max(worst, p / upper, lower / p)
    logger.info("Fitted kernel bound constant C={:.4g} (alpha={})".format(worst, ke.basis.alpha))
    return BoundConstants(worst, c1, c2)
