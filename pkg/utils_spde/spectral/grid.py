# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Uniform cell-centred grid on D = (-1, 1)."""

from dataclasses import dataclass

import numpy as np
from cached_property import cached_property

from utils_spde.common.exceptions import InvalidArgument


@dataclass(frozen=True)
class Grid1D:
    """Midpoints of `n_cells` equal cells partitioning (-1, 1).

    Args:
        n_cells (int): Number of cells, at least 2.
    """

    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise InvalidArgument("n_cells must be an integer >= 2, got {}".format(self.n_cells))

    @property
    def h(self):
        return 2.0 / self.n_cells

    @cached_property
    def nodes(self):
        # -1 + h(k + 1/2), written so that x_k = -x_{n-1-k} exactly
        k = np.arange(self.n_cells)
        nodes = (2.0 * k + 1.0 - self.n_cells) / self.n_cells
        nodes.setflags(write=False)
        return nodes

    def nearest_index(self, x):
        """Index of the node closest to `x` (ties go to the left node)."""
        if not -1.0 < x < 1.0:
            raise InvalidArgument("Point {} is not inside (-1, 1)".format(x))
        return int(np.argmin(np.abs(self.nodes - x)))

    def index_of(self, x, tol=1e-12):
        """Index of the node equal to `x` within `tol`.

        Raises:
            InvalidArgument: If `x` is not a grid node.
        """
        k = self.nearest_index(x)
        if abs(self.nodes[k] - x) > tol:
            raise InvalidArgument(
                "Point {} is not a grid node (nearest {})".format(x, self.nodes[k])
            )
        return k

    def region_mask(self, eps=None):
        """Boolean mask of the nodes in D (eps None) or in D_eps = {|x| <= 1 - eps}."""
        if eps is None:
            return np.ones(self.n_cells, dtype=bool)
        if not 0.0 < eps < 1.0:
            raise InvalidArgument("eps must lie in (0, 1), got {}".format(eps))
        return np.abs(self.nodes) <= 1.0 - eps

    def distance_to_boundary(self):
        return 1.0 - np.abs(self.nodes)
