# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Eigenpairs of the Dirichlet (fractional) Laplacian sampled on a Grid1D."""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd
from scipy import linalg

from utils_spde.common.exceptions import InvalidArgument, NumericFailure, PropertyViolation
from utils_spde.spectral.fractional import fractional_laplacian_matrix
from utils_spde.spectral.grid import Grid1D

logger = logging.getLogger(__name__)

EXACT_ORTHONORMALITY_TOL = 1e-10
NUMERIC_ORTHONORMALITY_TOL = 1e-6


class Provenance(str, Enum):
    """Where the eigenpairs of a basis come from."""

    EXACT: str = "exact"
    NUMERIC: str = "numeric"


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenvalues `mu` and grid-sampled eigenfunctions `phi` (one row per mode).

    Instances are immutable: the arrays are made read-only on construction, so a
    basis can be shared by concurrent consumers.
    """

    alpha: float
    grid: Grid1D
    mu: np.ndarray
    phi: np.ndarray
    provenance: Provenance
    d: int = 1

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        phi = np.array(self.phi, dtype=float)
        if mu.ndim != 1 or phi.shape != (mu.size, self.grid.n_cells):
            raise InvalidArgument(
                "phi must have shape (n_modes, n_cells) = ({}, {}), got {}".format(
                    mu.size, self.grid.n_cells, phi.shape
                )
            )
        if np.any(mu <= 0) or np.any(np.diff(mu) < 0):
            raise PropertyViolation("Eigenvalues must be positive and nondecreasing")
        if mu.size > 1 and not mu[0] < mu[1]:
            raise PropertyViolation("First eigenvalue is not simple: {} {}".format(mu[0], mu[1]))
        if np.any(phi[0] <= 0):
            raise PropertyViolation("First eigenfunction is not positive at every interior node")
        mu.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def n_modes(self):
        return self.mu.size

    @property
    def h(self):
        return self.grid.h

    def orthonormality_residual(self):
        """Returns max_{n,m} |h * sum_k phi_n phi_m - delta_nm|."""
        gram = self.h * self.phi @ self.phi.T
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))

    def project(self, values):
        """Eigen-coefficients a_n = h * sum_k u_k phi_n(x_k); works on stacked rows."""
        return self.h * np.asarray(values) @ self.phi.T

    def synthesize(self, coefficients):
        """Grid values sum_n a_n phi_n(x_k); inverse of `project` on the span."""
        return np.asarray(coefficients) @ self.phi

    def truncated(self, n_modes):
        """Returns the basis restricted to its first `n_modes` modes."""
        if not 1 <= n_modes <= self.n_modes:
            raise InvalidArgument("Cannot keep {} of {} modes".format(n_modes, self.n_modes))
        return SpectralBasis(
            self.alpha, self.grid, self.mu[:n_modes], self.phi[:n_modes], self.provenance, self.d
        )


def exact_basis_interval(n_modes, grid):
    """Dirichlet Laplacian eigenpairs on (-1, 1): mu_n = (n pi / 2)^2, phi_n = sin(n pi (x+1) / 2).

    Args:
        n_modes (int): Number of modes, 1 <= n_modes < grid.n_cells.
        grid (Grid1D): Sampling grid.

    Returns:
        SpectralBasis: Basis with provenance `exact` and alpha = 2.
    """
    if n_modes < 1:
        raise InvalidArgument("n_modes must be >= 1, got {}".format(n_modes))
    if n_modes >= grid.n_cells:
        raise InvalidArgument(
            "The exact basis needs n_modes < n_cells ({} >= {})".format(n_modes, grid.n_cells)
        )
    n = np.arange(1, n_modes + 1)
    mu = (n * np.pi / 2.0) ** 2
    phi = np.sin(np.outer(n, grid.nodes + 1.0) * np.pi / 2.0)
    return SpectralBasis(2.0, grid, mu, phi, Provenance.EXACT)


def _fix_signs(vectors):
    """Flips columns so mode 0 has positive sum and others a positive first entry."""
    vectors = vectors.copy()
    if vectors[:, 0].sum() < 0:
        vectors[:, 0] *= -1.0
    for j in range(1, vectors.shape[1]):
        column = vectors[:, j]
        significant = np.flatnonzero(np.abs(column) > 1e-8 * np.max(np.abs(column)))
        if column[significant[0]] < 0:
            vectors[:, j] *= -1.0
    return vectors


def numeric_basis(matrix, n_modes, grid, alpha=2.0):
    """Eigenpairs of -matrix by a dense symmetric eigensolve.

    Args:
        matrix (numpy.ndarray): Symmetric discretized generator A (negative definite).
        n_modes (int): Number of modes kept, 1 <= n_modes <= n_cells.
        grid (Grid1D): Grid the matrix lives on.
        alpha (float, optional): Stability index the matrix discretizes. Defaults to 2.

    Returns:
        SpectralBasis: Basis with provenance `numeric`, eigenvalues ascending.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (grid.n_cells, grid.n_cells):
        raise InvalidArgument("Matrix shape {} does not match the grid".format(matrix.shape))
    if not 1 <= n_modes <= grid.n_cells:
        raise InvalidArgument("n_modes must lie in [1, {}], got {}".format(grid.n_cells, n_modes))
    scale = np.max(np.abs(matrix))
    if np.max(np.abs(matrix - matrix.T)) > 1e-12 * scale:
        raise InvalidArgument("Matrix is not symmetric")
    try:
        mu, vectors = linalg.eigh(-matrix, subset_by_index=[0, n_modes - 1])
    except linalg.LinAlgError as e:
        raise NumericFailure("Symmetric eigensolver did not converge: {}".format(e))
    vectors = _fix_signs(vectors)
    phi = vectors.T / np.sqrt(grid.h)
    logger.info(
        "Computed {} eigenpairs on {} cells for alpha={}, mu_1={:.6g}".format(
            n_modes, grid.n_cells, alpha, mu[0]
        )
    )
    return SpectralBasis(float(alpha), grid, mu, phi, Provenance.NUMERIC)


def build_basis(alpha, grid, n_modes):
    """Exact basis for alpha = 2, numeric restricted fractional basis for 1 < alpha < 2."""
    if alpha == 2.0:
        return exact_basis_interval(n_modes, grid)
    return numeric_basis(fractional_laplacian_matrix(grid, alpha), n_modes, grid, alpha=alpha)


def basis_to_frame(basis):
    """Returns the basis as a table with columns n, mu, phi_at_node_0, ..."""
    frame = pd.DataFrame(
        basis.phi, columns=["phi_at_node_{}".format(k) for k in range(basis.grid.n_cells)]
    )
    frame.insert(0, "mu", basis.mu)
    frame.insert(0, "n", np.arange(1, basis.n_modes + 1))
    return frame


def export_basis_csv(basis, path):
    basis_to_frame(basis).to_csv(path, index=False, lineterminator="\n")
    return path
