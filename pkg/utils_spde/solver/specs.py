# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Nonlinearity, initial data and state types of the simulated equation."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from utils_spde.common.exceptions import InvalidArgument


class SigmaKind(str, Enum):
    LINEAR: str = "linear"
    PINCHED: str = "pinched"
    ADDITIVE: str = "additive"


@dataclass(frozen=True)
class SigmaSpec:
    """Noise coefficient sigma.

    linear: sigma(u) = u. pinched: sigma(u) = u (l + (L - l) / (1 + u^2)), so that
    l|u| <= |sigma(u)| <= L|u|. additive: sigma(u) = 1.
    """

    kind: SigmaKind = SigmaKind.LINEAR
    l: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SigmaKind(self.kind))
        if not 0.0 < self.l <= self.L:
            raise InvalidArgument("Need 0 < l <= L, got l={}, L={}".format(self.l, self.L))

    def __call__(self, u):
        u = np.asarray(u)
        if self.kind == SigmaKind.LINEAR:
            return u
        if self.kind == SigmaKind.ADDITIVE:
            return np.ones_like(u)
        return u * (self.l + (self.L - self.l) / (1.0 + u * u))

    @property
    def lipschitz(self):
        return self.L if self.kind == SigmaKind.PINCHED else 1.0

    @property
    def spec(self):
        if self.kind == SigmaKind.PINCHED:
            return "pinched:{},{}".format(self.l, self.L)
        return self.kind.value


def parse_sigma(spec):
    """Parses `linear`, `additive` or `pinched:<l>,<L>`."""
    name, _, params = str(spec).strip().partition(":")
    try:
        kind = SigmaKind(name.lower())
    except ValueError:
        raise InvalidArgument("Unknown sigma '{}'".format(spec))
    if kind != SigmaKind.PINCHED:
        return SigmaSpec(kind)
    try:
        l, L = (float(v) for v in params.split(","))
    except ValueError:
        raise InvalidArgument("pinched sigma needs 'pinched:<l>,<L>', got '{}'".format(spec))
    return SigmaSpec(kind, l, L)


class InitialKind(str, Enum):
    CONSTANT: str = "constant"
    FIRST_EIGENFUNCTION: str = "phi1"
    BUMP: str = "bump"


@dataclass(frozen=True)
class InitialCondition:
    """Nonnegative bounded initial datum u_0.

    constant: u_0 = level. phi1: u_0 = level * phi_1. bump: u_0 = level on D_eps, falling
    linearly to 0 at the boundary.
    """

    kind: InitialKind = InitialKind.CONSTANT
    level: float = 1.0
    eps: float = None

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))
        if self.level < 0:
            raise InvalidArgument("Initial level must be nonnegative, got {}".format(self.level))
        if self.kind == InitialKind.BUMP and (self.eps is None or not 0.0 < self.eps < 1.0):
            raise InvalidArgument("A bump needs eps in (0, 1), got {}".format(self.eps))

    def values(self, grid, basis=None):
        """u_0 on the grid nodes."""
        if self.kind == InitialKind.CONSTANT:
            return np.full(grid.n_cells, float(self.level))
        if self.kind == InitialKind.FIRST_EIGENFUNCTION:
            if basis is None:
                raise InvalidArgument("phi1 initial data needs a basis")
            return self.level * np.array(basis.phi[0])
        return self.level * np.clip(grid.distance_to_boundary() / self.eps, 0.0, 1.0)

    def satisfies_positivity(self, grid, eps, basis=None):
        """True if inf over D_eps of u_0 is positive."""
        return bool(np.min(self.values(grid, basis)[grid.region_mask(eps)]) > 0)

    @property
    def spec(self):
        if self.kind == InitialKind.BUMP:
            return "bump:{},{}".format(self.eps, self.level)
        if self.kind == InitialKind.FIRST_EIGENFUNCTION:
            return "phi1" if self.level == 1.0 else "phi1:{}".format(self.level)
        return "constant:{}".format(self.level)


def parse_initial_condition(spec):
    """Parses `constant:<c>`, `phi1[:<level>]` or `bump:<eps>,<level>`."""
    name, _, params = str(spec).strip().partition(":")
    try:
        kind = InitialKind(name.lower())
        values = [float(v) for v in params.split(",")] if params else []
    except ValueError:
        raise InvalidArgument("Unknown initial condition '{}'".format(spec))
    if kind == InitialKind.BUMP:
        if len(values) != 2:
            raise InvalidArgument("bump needs 'bump:<eps>,<level>', got '{}'".format(spec))
        return InitialCondition(kind, level=values[1], eps=values[0])
    if len(values) > 1:
        raise InvalidArgument("'{}' takes at most one parameter".format(spec))
    return InitialCondition(kind, level=values[0] if values else 1.0)


@dataclass(frozen=True, eq=False)
class FieldState:
    """Solution values on the grid nodes at time t for one path."""

    t: float
    values: np.ndarray
    path_id: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise InvalidArgument("Time must be nonnegative, got {}".format(self.t))
