# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Deterministic second-moment solvers for sigma(u) = l u (white) and sigma(u) = u (colored).

The solvers work on the same Galerkin system the simulator integrates. With
a(t) the eigen-coefficients, S(t) = E[a a^T] splits into the free part
a0(t) a0(t)^T and the noise part Q(t), which obeys

    Q(t_k) = lam^2 sum_{j=1..k} Omega_j * B[S(t_{k-j+1})],

with Omega_j the exact interval integrals of e^{-(mu_n+mu_m) tau} and B the noise
map of the covariance. The unknown is held at the right end of every step; the
j = 1 term makes each step implicit.
"""

import logging

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, gmres
from tqdm import tqdm

from utils_spde.common.exceptions import InvalidArgument, InvalidGrid, NumericFailure
from utils_spde.heatkernel.kernel import KernelEvaluator
from utils_spde.moments.fitting import excitation_time_scale, fit_log_linear
from utils_spde.noise.models import NoiseKind
from utils_spde.secondmoment.field import ChaosTerm, SecondMomentField
from utils_spde.secondmoment.kernels import (
    ClosureKernel,
    omega_weights,
    uniform_grid,
    uniform_step,
)

logger = logging.getLogger(__name__)

MAX_COLORED_CELLS = 128
MAX_CHAOS_ORDER = 8
GMRES_RTOL = 1e-12
CLOSURES = ("field", "diagonal")

# excitation grids in units of lam^(-2 alpha / (alpha - a)): (length, steps)
WHITE_EXCITATION_GRID = (120.0, 1200)
COLORED_EXCITATION_GRID = (10.0, 1000)


class ModalSecondMoment(object):
    """Common machinery of the modal Volterra recursions.

    Args:
        basis (SpectralBasis): Eigenpairs.
        u0_values (numpy.ndarray): Initial datum on the grid.
        lam (float): Noise level, nonnegative.
        t_grid (array-like): Uniform grid starting at 0.
    """

    def __init__(self, basis, u0_values, lam, t_grid):
        if lam < 0:
            raise InvalidArgument("lam must be nonnegative, got {}".format(lam))
        self.basis = basis
        self.lam = float(lam)
        self.times = np.asarray(t_grid, dtype=float)
        self.dt = uniform_step(self.times)
        self.n_steps = self.times.size - 1
        a0 = basis.project(u0_values)
        self.free = np.exp(-np.outer(self.times, basis.mu)) * a0
        self.omega = omega_weights(basis.mu, self.dt, self.n_steps)
        # P[x, n, m] = phi_n(x) phi_m(x)
        self._pairs = np.einsum("nx,mx->xnm", basis.phi, basis.phi)

    def grid_diagonal(self, S):
        """diag(Phi^T S Phi): E|u(x)|^2 of a modal second moment, on every node."""
        return np.einsum("xnm,...nm->...x", self._pairs, S)

    def noise_map(self, S):
        raise NotImplementedError

    def _memory(self, B, k):
        """sum_{j=2..k} Omega_j * B[t_{k-j+1}]."""
        if k < 2:
            return np.zeros_like(self.omega[0])
        return np.einsum("jnm,jnm->nm", self.omega[1:k], B[k - 1 : 0 : -1])

    def _implicit(self, rhs, k):
        """Solves Q - lam^2 Omega_1 * B[Q] = rhs."""
        raise NotImplementedError

    def solve_modal(self, verbose=False):
        """Returns the noise part Q, shape (n_times, N, N)."""
        N = self.basis.n_modes
        Q = np.zeros((self.times.size, N, N))
        B = np.zeros_like(Q)
        lam2 = self.lam ** 2
        if lam2 == 0:
            return Q
        for k in tqdm(range(1, self.times.size), desc="volterra", disable=not verbose):
            free = np.outer(self.free[k], self.free[k])
            rhs = lam2 * (self._memory(B, k) + self.omega[0] * self.noise_map(free))
            Q[k] = self._implicit(rhs, k)
            B[k] = self.noise_map(free + Q[k])
        return Q

    def chaos_terms(self, n_max):
        """Modal Picard increments D_0 = a0 a0^T, D_n = lam^2 V[D_{n-1}], n <= n_max."""
        if not 0 <= n_max <= MAX_CHAOS_ORDER:
            raise InvalidArgument(
                "n_max must lie in [0, {}], got {}".format(MAX_CHAOS_ORDER, n_max)
            )
        terms = [np.einsum("tn,tm->tnm", self.free, self.free)]
        lam2 = self.lam ** 2
        for _ in range(n_max):
            B = np.stack([self.noise_map(S) for S in terms[-1]])
            increment = np.zeros_like(B)
            for k in range(1, self.times.size):
                increment[k] = lam2 * np.einsum(
                    "jnm,jnm->nm", self.omega[:k], B[k:0:-1]
                )
            terms.append(increment)
        return terms


class WhiteSecondMoment(ModalSecondMoment):
    """White noise: B[S] = l^2 h Phi diag(E|u|^2) Phi^T, implicit step by one LU solve."""

    def __init__(self, basis, u0_values, lam, t_grid, l_or_L=1.0):
        super(WhiteSecondMoment, self).__init__(basis, u0_values, lam, t_grid)
        self.scale = float(l_or_L) ** 2
        h = basis.h
        flat = self._pairs.reshape(basis.grid.n_cells, -1)
        # W[x, y] = h sum_{n,m} phi_n(x) phi_m(x) Omega_1[n, m] phi_n(y) phi_m(y)
        self._w = h * self.scale * (flat * self.omega[0].reshape(-1)) @ flat.T
        system = np.eye(basis.grid.n_cells) - self.lam ** 2 * self._w
        if self.lam > 0 and np.max(np.abs(linalg.eigvalsh(self.lam ** 2 * self._w))) >= 1.0:
            raise InvalidGrid("Implicit step is not contractive: reduce the time step")
        self._lu = linalg.lu_factor(system)

    def noise_from_diagonal(self, diagonal):
        return self.scale * self.basis.h * (self.basis.phi * diagonal) @ self.basis.phi.T

    def noise_map(self, S):
        return self.noise_from_diagonal(self.grid_diagonal(S))

    def _implicit(self, rhs, k):
        # the grid diagonal q of Q solves (I - lam^2 W) q = diag(rhs)
        q = linalg.lu_solve(self._lu, self.grid_diagonal(rhs))
        return rhs + self.lam ** 2 * self.omega[0] * self.noise_from_diagonal(q)


class ColoredSecondMoment(ModalSecondMoment):
    """Correlated noise: B[S] = h^2 Phi ((Phi^T S Phi) * M) Phi^T, implicit step by GMRES."""

    def __init__(self, basis, cov, u0_values, lam, t_grid):
        if basis.grid.n_cells > MAX_COLORED_CELLS:
            raise InvalidArgument(
                "The colored solver supports at most {} cells, got {}".format(
                    MAX_COLORED_CELLS, basis.grid.n_cells
                )
            )
        super(ColoredSecondMoment, self).__init__(basis, u0_values, lam, t_grid)
        self.cov = cov

    def grid_matrix(self, S):
        """Phi^T S Phi: E[u(x) u(w)] on node pairs."""
        return self.basis.phi.T @ S @ self.basis.phi

    def noise_map(self, S):
        h = self.basis.h
        return h * h * self.basis.phi @ (self.grid_matrix(S) * self.cov.matrix) @ self.basis.phi.T

    def _implicit(self, rhs, k):
        N = self.basis.n_modes
        lam2 = self.lam ** 2

        def matvec(v):
            Q = v.reshape(N, N)
            return (Q - lam2 * self.omega[0] * self.noise_map(Q)).reshape(-1)

        operator = LinearOperator((N * N, N * N), matvec=matvec, dtype=float)
        b = rhs.reshape(-1)
        solution, info = gmres(operator, b, x0=b, rtol=GMRES_RTOL, atol=0.0)
        if info != 0:
            raise NumericFailure("GMRES did not converge at step {} (info={})".format(k, info))
        Q = solution.reshape(N, N)
        return 0.5 * (Q + Q.T)


def make_problem(basis, u0_values, lam, t_grid, cov=None, l_or_L=1.0):
    """White-noise recursion when `cov` is None or white, the colored one otherwise."""
    if cov is None or cov.model.kind == NoiseKind.WHITE:
        return WhiteSecondMoment(basis, u0_values, lam, t_grid, l_or_L)
    return ColoredSecondMoment(basis, cov, u0_values, lam, t_grid)


def _node_indices(basis, nodes):
    if nodes is None:
        return np.arange(basis.grid.n_cells)
    return np.array([basis.grid.index_of(x) for x in nodes])


def _renewal(forcing, weights):
    """Solves g_k = forcing_k + sum_{j=1..k} weights_j g_{k-j+1} with the j = 1 term implicit."""
    g = np.empty_like(forcing)
    g[0] = forcing[0]
    for k in range(1, forcing.size):
        memory = np.dot(weights[1:k], g[k - 1 : 0 : -1]) if k > 1 else 0.0
        g[k] = (forcing[k] + memory) / (1.0 - weights[0])
    return g


def _diagonal_closure(basis, u0_values, lam, t_grid, nodes, modal_cov, scale):
    """Scalar renewal equation g = h0^2 + lam^2 int k(t-s) g(s) ds at every node."""
    times = np.asarray(t_grid, dtype=float)
    dt = uniform_step(times)
    indices = _node_indices(basis, nodes)
    ke = KernelEvaluator(basis)
    h0 = (np.exp(-np.outer(times, basis.mu)) * basis.project(u0_values)) @ basis.phi
    values = np.empty((times.size, indices.size))
    for j, index in enumerate(indices):
        kernel = ClosureKernel(basis, index, modal_cov, ke.t_min, scale)
        weights = lam ** 2 * kernel.weights(dt, times.size - 1)
        if weights[0] >= 1.0:
            raise InvalidGrid(
                "lam^2 w_1 = {:.3g} >= 1: the time step is too coarse".format(weights[0])
            )
        values[:, j] = _renewal(h0[:, index] ** 2, weights)
    return SecondMomentField(times, basis.grid.nodes[indices], values, lam)


def _check_closure(closure):
    if closure not in CLOSURES:
        raise InvalidArgument("closure must be one of {}, got {}".format(CLOSURES, closure))


def renewal_solve_white(
    basis, u0_values, lam, l_or_L, t_grid, nodes=None, closure="field", verbose=False
):
    """E|u_t(x)|^2 under white noise with sigma(u) = l_or_L * u.

    Args:
        basis (SpectralBasis): Eigenpairs.
        u0_values (numpy.ndarray): Initial datum on the grid.
        lam (float): Noise level.
        l_or_L (float): Slope of the linear sigma standing in for sigma.
        t_grid (array-like): Uniform time grid starting at 0.
        nodes (list, optional): Node coordinates to report. Defaults to every node.
        closure (str, optional): "field" solves the Galerkin system; "diagonal" solves the
            scalar renewal equation with kernel p(2 tau, x, x) at each node.
        verbose (bool, optional): Show a progress bar.

    Returns:
        SecondMomentField: E|u_t(x)|^2 on the nodes.
    """
    _check_closure(closure)
    if closure == "diagonal":
        return _diagonal_closure(
            basis, u0_values, lam, t_grid, nodes, np.eye(basis.n_modes), float(l_or_L) ** 2
        )
    problem = WhiteSecondMoment(basis, u0_values, lam, t_grid, l_or_L)
    Q = problem.solve_modal(verbose)
    h0 = problem.free @ basis.phi
    values = h0 ** 2 + problem.grid_diagonal(Q)
    indices = _node_indices(basis, nodes)
    logger.info(
        "Solved white-noise renewal equation at lam={} over {} steps".format(lam, problem.n_steps)
    )
    return SecondMomentField(problem.times, basis.grid.nodes[indices], values[:, indices], lam)


def volterra_solve_colored(
    basis, cov, u0_values, lam, t_grid, nodes=None, closure="field", verbose=False
):
    """M(t, x, w) = E[u_t(x) u_t(w)] under correlated noise with sigma(u) = u.

    Args:
        basis (SpectralBasis): Eigenpairs.
        cov (SpatialCovariance): Noise covariance.
        u0_values (numpy.ndarray): Initial datum on the grid.
        lam (float): Noise level.
        t_grid (array-like): Uniform time grid starting at 0.
        nodes (list, optional): Node coordinates to report. Defaults to every node.
        closure (str, optional): "field" returns the node-pair field; "diagonal" solves
            the scalar renewal equation with the correlated double integral as kernel.
        verbose (bool, optional): Show a progress bar.

    Returns:
        SecondMomentField: Node-pair field (closure "field") or per-node field.
    """
    _check_closure(closure)
    if closure == "diagonal":
        return _diagonal_closure(
            basis, u0_values, lam, t_grid, nodes, cov.modal_matrix(basis), 1.0
        )
    problem = ColoredSecondMoment(basis, cov, u0_values, lam, t_grid)
    Q = problem.solve_modal(verbose)
    h0 = problem.free @ basis.phi
    noise_part = np.einsum("nx,tnm,my->txy", basis.phi, Q, basis.phi)
    noise_part = 0.5 * (noise_part + np.swapaxes(noise_part, 1, 2))
    values = np.einsum("tx,ty->txy", h0, h0) + noise_part
    indices = _node_indices(basis, nodes)
    logger.info(
        "Solved colored Volterra equation at lam={} over {} steps".format(lam, problem.n_steps)
    )
    return SecondMomentField(
        problem.times, basis.grid.nodes[indices], values[:, indices][:, :, indices], lam
    )


def picard_chaos_terms(basis, u0_values, lam, t_grid, n_max, cov=None, l_or_L=1.0, nodes=None):
    """Picard increments of the second-moment recursion, evaluated on the diagonal.

    The n-th increment is the n-th chaos contribution to E|u_t(x)|^2; it is homogeneous
    of degree 2n in lam and the increments sum to the implicit solution.

    Returns:
        list: ChaosTerm for n = 0..n_max.
    """
    problem = make_problem(basis, u0_values, lam, t_grid, cov, l_or_L)
    indices = _node_indices(basis, nodes)
    nodes = basis.grid.nodes[indices]
    return [
        ChaosTerm(n, problem.times, nodes, problem.grid_diagonal(D)[:, indices])
        for n, D in enumerate(problem.chaos_terms(n_max))
    ]


def picard_tail_bound(terms):
    """Geometric bound D_n r / (1 - r) on the omitted increments, r = D_n / D_{n-1}.

    Returns:
        numpy.ndarray: Bound per (time, node); inf where the last ratio is >= 1.
    """
    if len(terms) < 2:
        raise InvalidArgument("Need at least two chaos terms")
    last, previous = terms[-1].values, terms[-2].values
    ratio = np.divide(last, previous, out=np.zeros_like(last), where=previous > 0)
    with np.errstate(divide="ignore"):
        return np.where(ratio < 1.0, last * ratio / (1.0 - ratio), np.inf)


def lyapunov_rate_from_field(field, x, window=None):
    """Fits log E|u_t(x)|^2 ~ rate * t on a field."""
    k = field.node_index(x)
    with np.errstate(divide="ignore"):
        log_values = np.log(field.diagonal()[:, k])
    return fit_log_linear(field.times, log_values, window)


def excitation_grid(alpha, a, lam, white):
    """Uniform grid laid out in units lam^(-2 alpha / (alpha - a))."""
    length, n_steps = WHITE_EXCITATION_GRID if white else COLORED_EXCITATION_GRID
    return uniform_grid(length * excitation_time_scale(alpha, a, lam), n_steps)


def excitation_rates(basis, cov, u0_values, lambdas, x=0.0, l_or_L=1.0):
    """p = 2 growth rates of the diagonal closure at large noise levels.

    Each rate is the slope of log E|u_t(x)|^2 over the second half of a grid scaled to
    the noise level.

    Returns:
        dict: Noise level to rate.
    """
    white = cov is None or cov.model.kind == NoiseKind.WHITE
    a = 1.0 if white else cov.model.scaling_exponent
    rates = {}
    for lam in lambdas:
        t_grid = excitation_grid(basis.alpha, a, lam, white)
        if white:
            field = renewal_solve_white(basis, u0_values, lam, l_or_L, t_grid, [x], "diagonal")
        else:
            field = volterra_solve_colored(basis, cov, u0_values, lam, t_grid, [x], "diagonal")
        fit = lyapunov_rate_from_field(field, x, (t_grid[-1] / 2.0, t_grid[-1]))
        rates[float(lam)] = fit.rate
        logger.info("Diagonal-closure rate at lam={}: {:.6g}".format(lam, fit.rate))
    return rates
