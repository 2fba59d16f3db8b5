# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Spatial correlation models of the driving noise and their well-posedness predicates."""

from dataclasses import dataclass
from enum import Enum

from utils_spde.common.exceptions import InvalidArgument


class NoiseKind(str, Enum):
    """Spatial correlation families."""

    WHITE: str = "white"
    RIESZ: str = "riesz"
    FRACTIONAL_PRODUCT: str = "frac"
    BESSEL: str = "bessel"


SAMPLED_KINDS = (NoiseKind.WHITE, NoiseKind.RIESZ)


@dataclass(frozen=True)
class CovarianceModel:
    """Spatial correlation f of the noise.

    Args:
        kind (NoiseKind): Family of the model.
        beta (float, optional): Riesz exponent, f(x) = |x|^-beta.
        hurst (tuple, optional): Hurst indices H_1..H_d of the fractional product kernel.
        eta (float, optional): Bessel kernel order.
    """

    kind: NoiseKind
    beta: float = None
    hurst: tuple = None
    eta: float = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind == NoiseKind.RIESZ:
            if self.beta is None or self.beta <= 0:
                raise InvalidArgument("Riesz exponent must be positive, got {}".format(self.beta))
        elif self.kind == NoiseKind.FRACTIONAL_PRODUCT:
            if not self.hurst or any(not 0.5 < h < 1.0 for h in self.hurst):
                raise InvalidArgument(
                    "Hurst indices must lie in (1/2, 1), got {}".format(self.hurst)
                )
            object.__setattr__(self, "hurst", tuple(float(h) for h in self.hurst))
        elif self.kind == NoiseKind.BESSEL:
            if self.eta is None or self.eta <= 0:
                raise InvalidArgument("Bessel order must be positive, got {}".format(self.eta))

    @property
    def scaling_exponent(self):
        """Exponent a with f(c x) = c^-a f(x): beta for Riesz, 1 for white noise in d = 1."""
        if self.kind == NoiseKind.WHITE:
            return 1.0
        if self.kind == NoiseKind.RIESZ:
            return float(self.beta)
        raise InvalidArgument("Model '{}' has no scaling exponent in use".format(self.spec))

    @property
    def spec(self):
        """Spec string that `parse_model` maps back to this model."""
        if self.kind == NoiseKind.WHITE:
            return "white"
        if self.kind == NoiseKind.RIESZ:
            return "riesz:{}".format(self.beta)
        if self.kind == NoiseKind.BESSEL:
            return "bessel:{}".format(self.eta)
        return "frac:{}".format(",".join(str(h) for h in self.hurst))

    def correlation(self, x):
        """f(x) for the Riesz kernel."""
        if self.kind != NoiseKind.RIESZ:
            raise InvalidArgument("Pointwise correlation is only defined for Riesz kernels")
        return abs(x) ** -self.beta


def parse_model(spec):
    """Parses `white`, `riesz:<beta>`, `bessel:<eta>` or `frac:<H1>[,<H2>...]`.

    Args:
        spec (str): Model spec string.

    Returns:
        CovarianceModel: The model.
    """
    name, _, params = str(spec).strip().partition(":")
    try:
        kind = NoiseKind(name.lower())
    except ValueError:
        raise InvalidArgument("Unknown noise model '{}'".format(spec))
    if kind == NoiseKind.WHITE:
        if params:
            raise InvalidArgument("White noise takes no parameter: '{}'".format(spec))
        return CovarianceModel(kind)
    if not params:
        raise InvalidArgument("Noise model '{}' needs a parameter".format(spec))
    try:
        values = [float(v) for v in params.split(",")]
    except ValueError:
        raise InvalidArgument("Cannot parse parameters of '{}'".format(spec))
    if kind == NoiseKind.FRACTIONAL_PRODUCT:
        return CovarianceModel(kind, hurst=tuple(values))
    if len(values) != 1:
        raise InvalidArgument("Noise model '{}' takes one parameter".format(spec))
    if kind == NoiseKind.RIESZ:
        return CovarianceModel(kind, beta=values[0])
    return CovarianceModel(kind, eta=values[0])


def dalang_condition(model, alpha, d):
    """Closed-form Dalang condition for the supported families.

    Args:
        model (CovarianceModel): Noise model.
        alpha (float): Stability index in (0, 2].
        d (int): Spatial dimension.

    Returns:
        bool: True if the equation has a unique random-field solution.
    """
    if not 0.0 < alpha <= 2.0 or d < 1:
        raise InvalidArgument("Need alpha in (0, 2] and d >= 1, got {}, {}".format(alpha, d))
    if model.kind == NoiseKind.WHITE:
        return alpha > d
    if model.kind == NoiseKind.RIESZ:
        return model.beta < alpha
    if model.kind == NoiseKind.FRACTIONAL_PRODUCT:
        if len(model.hurst) != d:
            raise InvalidArgument("Need {} Hurst indices, got {}".format(d, len(model.hurst)))
        return sum(model.hurst) > d - alpha / 2.0
    return model.eta > d - alpha


def hypothesis_h0_check(model, alpha, d=1):
    """True iff the model is a Riesz kernel with 0 < beta < min(alpha, d)."""
    return model.kind == NoiseKind.RIESZ and 0.0 < model.beta < min(alpha, d)
