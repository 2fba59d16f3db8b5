# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Cell-averaged covariance of the spatial noise on a grid and Gaussian increments with it."""

import logging
from dataclasses import dataclass

import numpy as np
from cached_property import cached_property
from scipy import linalg

from utils_spde.common.exceptions import InvalidArgument, NumericFailure
from utils_spde.noise.models import CovarianceModel, NoiseKind
from utils_spde.spectral.grid import Grid1D

logger = logging.getLogger(__name__)

JITTER_SCALE = 1e-12
MAX_JITTER_ATTEMPTS = 3
PSD_TOL = 1e-10


def riesz_cell_average(offsets, h, beta):
    """h^-2 times the integral of |y - z|^-beta over two cells `offsets` cells apart.

    Uses the double antiderivative |u|^(2-beta) / ((1-beta)(2-beta)) of |u|^-beta.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidArgument("Cell averaging needs 0 < beta < 1 in d = 1, got {}".format(beta))
    m = np.abs(np.asarray(offsets, dtype=float))
    p = 2.0 - beta
    second_difference = np.abs(m + 1.0) ** p - 2.0 * m ** p + np.abs(m - 1.0) ** p
    return h ** -beta * second_difference / ((1.0 - beta) * (2.0 - beta))


@dataclass(frozen=True, eq=False)
class SpatialCovariance:
    """Covariance density M of the cell-averaged noise on `grid`.

    The Cholesky factor is computed on first use; if plain factorization fails, a
    diagonal jitter of 1e-12 * trace / n is added, at most three times.
    """

    grid: Grid1D
    matrix: np.ndarray
    model: CovarianceModel

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        n = self.grid.n_cells
        if matrix.shape != (n, n):
            raise InvalidArgument(
                "Covariance shape {} does not match the grid".format(matrix.shape)
            )
        if not np.array_equal(matrix, matrix.T):
            raise InvalidArgument("Covariance matrix is not symmetric")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_cells(self):
        return self.grid.n_cells

    @cached_property
    def eigenvalues(self):
        return linalg.eigvalsh(self.matrix)

    @property
    def norm(self):
        """Spectral norm of M."""
        return float(np.max(np.abs(self.eigenvalues)))

    @cached_property
    def _cholesky(self):
        min_eig = self.eigenvalues[0]
        if min_eig < -PSD_TOL * self.norm:
            raise NumericFailure(
                "Covariance is not positive semidefinite: min eigenvalue {:.3g}".format(min_eig)
            )
        jitter_step = JITTER_SCALE * np.trace(self.matrix) / self.n_cells
        for attempt in range(MAX_JITTER_ATTEMPTS + 1):
            jitter = attempt * jitter_step
            try:
                factor = linalg.cholesky(
                    self.matrix + jitter * np.eye(self.n_cells), lower=True
                )
            except linalg.LinAlgError:
                continue
            if attempt > 0:
                logger.warning("Cholesky needed a diagonal jitter of {:.3g}".format(jitter))
            factor.setflags(write=False)
            return factor, jitter
        raise NumericFailure(
            "Cholesky failed after {} jitter attempts".format(MAX_JITTER_ATTEMPTS)
        )

    @property
    def factor(self):
        """Lower-triangular L with L L^T = M (+ jitter)."""
        return self._cholesky[0]

    @property
    def jitter_applied(self):
        return self._cholesky[1]

    def correlate(self, standard_normals):
        """Maps standard normal rows xi to rows L xi with covariance M."""
        return np.asarray(standard_normals) @ self.factor.T

    def modal_matrix(self, basis):
        """Covariance h^2 Phi M Phi^T of the projections of one unit-time increment."""
        h = self.grid.h
        return h * h * basis.phi @ self.matrix @ basis.phi.T


def covariance_matrix(grid, model):
    """Builds the cell-averaged covariance of a white or Riesz noise.

    Args:
        grid (Grid1D): Spatial grid.
        model (CovarianceModel): `white` or `riesz` with beta < 1.

    Returns:
        SpatialCovariance: White noise gives I / h, Riesz the Toeplitz matrix of cell averages.
    """
    if model.kind == NoiseKind.WHITE:
        matrix = np.eye(grid.n_cells) / grid.h
    elif model.kind == NoiseKind.RIESZ:
        matrix = linalg.toeplitz(riesz_cell_average(np.arange(grid.n_cells), grid.h, model.beta))
    else:
        raise InvalidArgument("Sampling is not available for noise model '{}'".format(model.spec))
    logger.info("Built {} covariance on {} cells".format(model.spec, grid.n_cells))
    return SpatialCovariance(grid, matrix, model)


def sample_spatial_increment(cov, rng_stream, dt, size=None):
    """Draws sqrt(dt) L xi, a centred Gaussian vector with covariance dt M.

    Args:
        cov (SpatialCovariance): Noise covariance.
        rng_stream (numpy.random.Generator): Stream owned by the caller.
        dt (float): Time step, positive.
        size (int, optional): Number of independent increments; one vector if None.

    Returns:
        numpy.ndarray: Shape (n_cells,) or (size, n_cells).
    """
    if dt <= 0:
        raise InvalidArgument("dt must be positive, got {}".format(dt))
    shape = (cov.n_cells,) if size is None else (size, cov.n_cells)
    return np.sqrt(dt) * cov.correlate(rng_stream.standard_normal(shape))
