# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Product-integration weights of the second-moment Volterra equations.

In eigencoordinates the memory kernel is a sum of exponentials e^{-(mu_n + mu_m) tau},
so the weights over every time step are integrated in closed form. The scalar
(diagonal) closure uses the kernel k(tau) = sum_{n,m} e^{-(mu_n+mu_m) tau} phi_n(x)
phi_m(x) C_nm, which is p(2 tau, x, x) for white noise, and continues it below the
trusted horizon by a fitted power law.
"""

import logging

import numpy as np
from scipy import stats

from utils_spde.common.exceptions import InvalidGrid

logger = logging.getLogger(__name__)

HORIZON_FACTOR = 4.0
POWER_FIT_SPAN = 4.0
POWER_FIT_POINTS = 16


def uniform_step(t_grid, rtol=1e-9):
    """Step of a uniform grid starting at 0.

    Raises:
        InvalidGrid: If the grid does not start at 0, is not uniform or has fewer than 2 points.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 2 or t_grid[0] != 0.0:
        raise InvalidGrid("Time grid must start at 0 and have at least 2 points")
    steps = np.diff(t_grid)
    dt = steps.mean()
    if dt <= 0 or np.max(np.abs(steps - dt)) > rtol * dt * t_grid.size:
        raise InvalidGrid("Time grid must be uniform")
    return float(dt)


def uniform_grid(t_max, n_steps):
    return np.linspace(0.0, t_max, n_steps + 1)


def _interval_integral(rates, lo, hi):
    """(e^{-r lo} - e^{-r hi}) / r elementwise, with the r -> 0 limit hi - lo."""
    rates = np.asarray(rates, dtype=float)
    safe = np.where(rates > 0, rates, 1.0)
    value = np.exp(-safe * lo) * -np.expm1(-safe * (hi - lo)) / safe
    return np.where(rates > 0, value, hi - lo)


def omega_weights(mu, dt, n_steps):
    """Omega_j[n, m] = integral over [(j-1) dt, j dt] of e^{-(mu_n + mu_m) tau}, j = 1..n_steps.

    Returns:
        numpy.ndarray: Shape (n_steps, N, N).
    """
    rates = np.add.outer(mu, mu)
    j = np.arange(n_steps)[:, None, None]
    return _interval_integral(rates[None, :, :], j * dt, (j + 1) * dt)


class ClosureKernel(object):
    """Scalar memory kernel k(tau) at one node, exact above tau_c and a power law below.

    Args:
        basis (SpectralBasis): Eigenpairs.
        index (int): Node index.
        modal_cov (numpy.ndarray): Modal covariance C of one unit-time noise increment
            (identity for white noise).
        t_min (float): Trusted horizon of the eigen-series; tau_c = 4 t_min.
        scale (float, optional): Constant factor, e.g. l^2 for a bounded sigma.
    """

    def __init__(self, basis, index, modal_cov, t_min, scale=1.0):
        phi_x = basis.phi[:, index]
        self._coefficients = scale * np.outer(phi_x, phi_x) * modal_cov
        self._rates = np.add.outer(basis.mu, basis.mu)
        self.tau_c = HORIZON_FACTOR * t_min
        tau = np.geomspace(self.tau_c, POWER_FIT_SPAN * self.tau_c, POWER_FIT_POINTS)
        values = self.exact(tau)
        if np.any(values <= 0):
            raise InvalidGrid("Closure kernel is not positive near tau_c={:.3g}".format(self.tau_c))
        fit = stats.linregress(np.log(tau), np.log(values))
        self.gamma = float(-fit.slope)
        if self.gamma >= 1.0:
            raise InvalidGrid(
                "Kernel singularity exponent {:.3f} is not integrable".format(self.gamma)
            )
        self.amplitude = float(self.exact(self.tau_c)[0])
        logger.debug("Closure kernel gamma={:.4f}, tau_c={:.3g}".format(self.gamma, self.tau_c))

    def exact(self, tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        decay = np.exp(-self._rates[None] * tau[:, None, None])
        return np.einsum("tnm,nm->t", decay, self._coefficients)

    def __call__(self, tau):
        """k(tau) with the power-law continuation below tau_c."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        below = tau < self.tau_c
        values = np.empty_like(tau)
        values[below] = self.amplitude * (tau[below] / self.tau_c) ** -self.gamma
        if np.any(~below):
            values[~below] = self.exact(tau[~below])
        return values

    def integral(self, lo, hi):
        """Integral of k over [lo, hi]."""
        total = 0.0
        if lo < self.tau_c:
            top = min(hi, self.tau_c)
            power = 1.0 - self.gamma
            total += (
                self.amplitude * self.tau_c ** self.gamma * (top ** power - lo ** power) / power
            )
        if hi > self.tau_c:
            bottom = max(lo, self.tau_c)
            total += float(np.sum(self._coefficients * _interval_integral(self._rates, bottom, hi)))
        return total

    def weights(self, dt, n_steps):
        """w_j = integral of k over [(j-1) dt, j dt], j = 1..n_steps.

        Raises:
            InvalidGrid: If a weight is not positive.
        """
        w = np.array([self.integral(j * dt, (j + 1) * dt) for j in range(n_steps)])
        if np.any(w <= 0):
            raise InvalidGrid("Product-integration weights must be positive")
        return w
