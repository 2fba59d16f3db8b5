# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Discretizations of the Dirichlet Laplacian and of the restricted fractional Laplacian.

The fractional operator is assembled in the symmetric form

    (-A u)_k = C(alpha) * sum_{m >= 1} w_m (2 u_k - u_{k+m} - u_{k-m}),

with u = 0 on the virtual cells outside (-1, 1). The near field |r| < h is
integrated exactly against the quadratic Taylor term of u, the far field
against the piecewise-linear interpolant of u. Because the full-line sum of
the weights has a closed form, the diagonal carries the exact principal-value
cancellation and the exact exterior killing integral.
"""

import logging

import numpy as np
from scipy import linalg
from scipy.special import gamma

from utils_spde.common.exceptions import InvalidArgument

logger = logging.getLogger(__name__)


def fractional_constant(alpha):
    """C(alpha) = alpha 2^(alpha-1) Gamma((alpha+1)/2) / (sqrt(pi) Gamma(1 - alpha/2)), d = 1."""
    if not 0.0 < alpha < 2.0:
        raise InvalidArgument("alpha must lie in (0, 2), got {}".format(alpha))
    return (
        alpha
        * 2.0 ** (alpha - 1.0)
        * gamma((alpha + 1.0) / 2.0)
        / (np.sqrt(np.pi) * gamma(1.0 - alpha / 2.0))
    )


def stencil_weights(alpha, n_offsets):
    """Weights w_1..w_{n_offsets} in units of h^(-alpha).

    Returns:
        numpy.ndarray: w[m-1] = w_m.
    """
    m = np.arange(1, n_offsets + 1, dtype=float)
    # exact moments of s^(-1-alpha) over [m, m+1]
    i0 = (m ** -alpha - (m + 1.0) ** -alpha) / alpha
    i1 = ((m + 1.0) ** (1.0 - alpha) - m ** (1.0 - alpha)) / (1.0 - alpha)
    a = (m + 1.0) * i0 - i1
    b = i1 - m * i0
    w = a.copy()
    w[0] += 1.0 / (2.0 - alpha)
    w[1:] += b[:-1]
    return w


def stencil_total(alpha):
    """Closed form of sum_{m >= 1} w_m in units of h^(-alpha)."""
    return 1.0 / (2.0 - alpha) + 1.0 / alpha


def fractional_laplacian_matrix(grid, alpha):
    """Matrix A of the restricted fractional Laplacian -(-Delta)^(alpha/2) with u = 0 off D.

    Args:
        grid (Grid1D): Cell-centred grid on (-1, 1).
        alpha (float): Stability index in (1, 2).

    Returns:
        numpy.ndarray: Symmetric Toeplitz matrix; -A has positive row sums (killing).
    """
    if not 1.0 < alpha < 2.0:
        raise InvalidArgument("alpha must lie in (1, 2), got {}".format(alpha))
    n = grid.n_cells
    scale = fractional_constant(alpha) * grid.h ** -alpha
    column = np.empty(n)
    column[0] = 2.0 * stencil_total(alpha)
    column[1:] = -stencil_weights(alpha, n - 1)
    logger.info("Assembled fractional matrix for alpha={} on {} cells".format(alpha, n))
    return -scale * linalg.toeplitz(column)


def second_difference_matrix(grid):
    """Cell-centred three-point Laplacian with odd reflection across x = +-1.

    Its eigenvectors are the sampled sine modes and its eigenvalues are
    4 sin^2(n pi / (2 n_cells)) / h^2.
    """
    n = grid.n_cells
    main = np.full(n, -2.0)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    matrix = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    return matrix / grid.h ** 2


def killing_rates(matrix):
    """Returns (-A) applied to the constant-1 vector."""
    return -np.asarray(matrix).sum(axis=1)
