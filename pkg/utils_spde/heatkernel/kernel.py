# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Truncated eigen-series of the Dirichlet heat kernel p_D(t, x, y) and its integrals."""

import logging

import numpy as np

from utils_spde.common.exceptions import DomainError, InvalidArgument
from utils_spde.noise.covariance import SpatialCovariance, covariance_matrix
from utils_spde.noise.models import CovarianceModel, NoiseKind, hypothesis_h0_check

logger = logging.getLogger(__name__)

T_MIN_FACTOR = 3.0


class KernelEvaluator:
    """Evaluates p_D(t, x, y) = sum_{n <= n_terms} e^{-mu_n t} phi_n(x) phi_n(y) on grid nodes.

    Times below t_min = 3 / mu_{n_terms} are refused: there the series is no longer
    a faithful picture of the kernel.

    Args:
        basis (SpectralBasis): Eigenpairs of the generator.
        n_terms (int, optional): Number of series terms. Defaults to all modes of the basis.
    """

    def __init__(self, basis, n_terms=None):
        n_terms = basis.n_modes if n_terms is None else int(n_terms)
        if not 1 <= n_terms <= basis.n_modes:
            raise InvalidArgument(
                "n_terms must lie in [1, {}], got {}".format(basis.n_modes, n_terms)
            )
        self.basis = basis
        self.n_terms = n_terms
        self.t_min = T_MIN_FACTOR / basis.mu[n_terms - 1]
        self._mu = basis.mu[:n_terms]
        self._phi = basis.phi[:n_terms]

    @property
    def grid(self):
        return self.basis.grid

    @property
    def mu1(self):
        return float(self.basis.mu[0])

    def check_time(self, t):
        if not t >= self.t_min:
            raise DomainError(
                "t={} is below the trusted horizon t_min={:.4g} of {} terms".format(
                    t, self.t_min, self.n_terms
                )
            )

    def index(self, x):
        """Node index of the coordinate `x`."""
        return self.grid.index_of(x)

    def _decay(self, t):
        self.check_time(t)
        return np.exp(-self._mu * t)

    def kernel_eval(self, t, x, y):
        """p_D(t, x, y) for grid nodes x and y."""
        i, j = self.index(x), self.index(y)
        return float(np.sum(self._decay(t) * (self._phi[:, i] * self._phi[:, j])))

    def row(self, t, x):
        """p_D(t, x, .) on all nodes."""
        i = self.index(x)
        return (self._decay(t) * self._phi[:, i]) @ self._phi

    def matrix(self, t):
        """p_D(t, x_i, x_j) on all node pairs; exactly symmetric."""
        weighted = self._phi * np.sqrt(self._decay(t))[:, None]
        kernel = weighted.T @ weighted
        return 0.5 * (kernel + kernel.T)

    def diagonal(self, t, x):
        """p_D(t, x, x) for an array of times."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        self.check_time(t.min())
        i = self.index(x)
        return np.exp(-np.outer(t, self._mu)) @ (self._phi[:, i] ** 2)

    def tail_bound(self, t):
        """Bound on the series remainder beyond n_terms.

        e^{-mu_{N+1} t} max_n |phi_n|_inf^2 / (1 - e^{-(mu_{N+2} - mu_{N+1}) t}). When the
        basis stops at N, mu_{N+1} is replaced by mu_N and the gap by mu_N - mu_{N-1}.
        """
        self.check_time(t)
        mu = self.basis.mu
        n = self.n_terms
        if mu.size >= n + 2:
            first, gap = mu[n], mu[n + 1] - mu[n]
        else:
            first = mu[n - 1] if mu.size == n else mu[n]
            gap = mu[-1] - mu[-2] if mu.size >= 2 else mu[-1]
        sup_norm = np.max(np.abs(self.basis.phi)) ** 2
        return float(np.exp(-first * t) * sup_norm / -np.expm1(-gap * t))

    def semigroup_residual(self, t, s, x, y):
        """|p(t+s, x, y) - h sum_z p(t, x, z) p(s, z, y)|."""
        composed = self.grid.h * np.sum(self.row(t, x) * self.row(s, y))
        return abs(self.kernel_eval(t + s, x, y) - composed)


def _region(grid, eps):
    return grid.region_mask(eps)


def mass_integral(ke, t, x, eps=None):
    """h sum_{y in region} p(t, x, y); region is D (eps None) or D_eps."""
    mask = _region(ke.grid, eps)
    return float(ke.grid.h * np.sum(ke.row(t, x)[mask]))


def square_mass_integral(ke, t, x, eps=None):
    """h sum_{y in region} p(t, x, y)^2."""
    mask = _region(ke.grid, eps)
    values = ke.row(t, x)[mask]
    return float(ke.grid.h * np.sum(values * values))


def _as_covariance(ke, noise):
    if isinstance(noise, SpatialCovariance):
        return noise
    if isinstance(noise, CovarianceModel):
        return covariance_matrix(ke.grid, noise)
    raise InvalidArgument("Expected a CovarianceModel or SpatialCovariance, got {}".format(noise))


def correlated_double_integral(ke, t, x, w, noise, eps=None):
    """h^2 sum_{y, z in region} p(t, x, y) p(t, w, z) fbar(y, z).

    Args:
        ke (KernelEvaluator): Kernel.
        t (float): Time, at least ke.t_min.
        x (float): First node.
        w (float): Second node.
        noise (CovarianceModel or SpatialCovariance): White noise or a Riesz kernel with
            beta < min(alpha, 1).
        eps (float, optional): Restricts y and z to D_eps.

    Returns:
        float: The integral; for white noise h sum_y p(t, x, y) p(t, w, y).
    """
    model = noise.model if isinstance(noise, SpatialCovariance) else noise
    if model.kind == NoiseKind.WHITE:
        mask = _region(ke.grid, eps)
        return float(ke.grid.h * np.sum(ke.row(t, x)[mask] * ke.row(t, w)[mask]))
    if not hypothesis_h0_check(model, ke.basis.alpha, ke.basis.d):
        raise InvalidArgument(
            "Need a Riesz kernel with 0 < beta < min(alpha, d), got '{}'".format(model.spec)
        )
    cov = _as_covariance(ke, noise)
    mask = _region(ke.grid, eps)
    px, pw = ke.row(t, x)[mask], ke.row(t, w)[mask]
    h = ke.grid.h
    return float(h * h * px @ cov.matrix[np.ix_(mask, mask)] @ pw)


def kernel_eval(ke, t, x, y):
    return ke.kernel_eval(t, x, y)


def semigroup_residual(ke, t, s, x, y):
    return ke.semigroup_residual(t, s, x, y)
