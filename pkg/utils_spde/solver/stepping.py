# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Exponential Euler steps of the mild formulation in eigencoordinates."""

import numpy as np

from utils_spde.common.exceptions import BlowUpDetected, InvalidArgument
from utils_spde.noise.covariance import sample_spatial_increment
from utils_spde.solver.specs import FieldState


def dt_max(lam, sigma, cov):
    """Largest admissible step (2 lam L_sigma ||M||^{1/2})^{-2}; infinite without noise."""
    scale = 2.0 * lam * sigma.lipschitz * np.sqrt(cov.norm)
    return np.inf if scale == 0 else 1.0 / scale ** 2


def decay_factors(basis, dt, with_drift=True):
    """e^{-mu_n dt}, or ones when the drift is switched off."""
    if not with_drift:
        return np.ones(basis.n_modes)
    return np.exp(-basis.mu * dt)


def deterministic_drift(basis, state, dt, with_drift=True):
    """Applies the semigroup S(dt) exactly in eigencoordinates.

    Args:
        basis (SpectralBasis): Eigenpairs of the generator.
        state (FieldState): Current state.
        dt (float): Step, positive.
        with_drift (bool, optional): With False, mu_n is taken as 0 (test hook).

    Returns:
        FieldState: State at t + dt, projected on the span of the basis.
    """
    if dt <= 0:
        raise InvalidArgument("dt must be positive, got {}".format(dt))
    coefficients = basis.project(state.values) * decay_factors(basis, dt, with_drift)
    return FieldState(state.t + dt, basis.synthesize(coefficients), state.path_id)


def em_step(basis, cov, sigma, lam, state, dt, rng_stream, with_drift=True):
    """One step u -> S(dt)[u + lam sigma(u) dW].

    Args:
        basis (SpectralBasis): Eigenpairs of the generator.
        cov (SpatialCovariance): Noise covariance on the grid.
        sigma (SigmaSpec): Noise coefficient.
        lam (float): Noise level, nonnegative.
        state (FieldState): Current state.
        dt (float): Step, at most `dt_max(lam, sigma, cov)`.
        rng_stream (numpy.random.Generator): Stream of the path.
        with_drift (bool, optional): Test hook, see `deterministic_drift`.

    Returns:
        FieldState: State at t + dt.

    Raises:
        BlowUpDetected: If the new state is not finite.
    """
    if lam < 0:
        raise InvalidArgument("lam must be nonnegative, got {}".format(lam))
    limit = dt_max(lam, sigma, cov)
    if dt > limit:
        raise InvalidArgument("dt={} exceeds dt_max={:.4g}".format(dt, limit))
    values = state.values
    if lam > 0:
        increment = sample_spatial_increment(cov, rng_stream, dt)
        with np.errstate(over="ignore", invalid="ignore"):
            values = values + lam * sigma(values) * increment
    if not np.all(np.isfinite(values)):
        raise BlowUpDetected(
            "Path {} is not finite at t={}".format(state.path_id, state.t + dt), [state.path_id]
        )
    return deterministic_drift(basis, FieldState(state.t, values, state.path_id), dt, with_drift)
