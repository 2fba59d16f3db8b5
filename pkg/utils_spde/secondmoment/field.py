# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Second moments on a time grid, either E|u_t(x)|^2 per node or E[u_t(x) u_t(w)] per node pair."""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd

from utils_spde.common.exceptions import InvalidArgument

CSV_COLUMNS = ["t", "x", "w", "second_moment"]

ChaosTerm = namedtuple("ChaosTerm", ["n", "times", "nodes", "values"])
ChaosTerm.__doc__ = "n-th Picard increment of E|u_t(x)|^2 on the nodes, shape (n_times, n_nodes)."


@dataclass(frozen=True, eq=False)
class SecondMomentField:
    """Second moments at times t_0 = 0 < ... < t_K.

    Args:
        times (numpy.ndarray): Time grid.
        nodes (numpy.ndarray): Node coordinates.
        values (numpy.ndarray): (n_times, n_nodes) for E|u_t(x)|^2, or
            (n_times, n_nodes, n_nodes) for E[u_t(x) u_t(w)].
        lam (float): Noise level of the solve.
    """

    times: np.ndarray
    nodes: np.ndarray
    values: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape[:2] != (times.size, nodes.size) or values.ndim not in (2, 3):
            raise InvalidArgument(
                "values shape {} does not match {} times and {} nodes".format(
                    values.shape, times.size, nodes.size
                )
            )
        if values.ndim == 3 and values.shape[2] != nodes.size:
            raise InvalidArgument("Pair values must be square in the node axes")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def pairs(self):
        return self.values.ndim == 3

    def diagonal(self):
        """E|u_t(x)|^2, shape (n_times, n_nodes)."""
        if self.pairs:
            return np.diagonal(self.values, axis1=1, axis2=2).copy()
        return self.values

    def node_index(self, x, tol=1e-12):
        k = int(np.argmin(np.abs(self.nodes - x)))
        if abs(self.nodes[k] - x) > tol:
            raise InvalidArgument("Point {} is not a node of the field".format(x))
        return k

    def time_index(self, t, tol=1e-9):
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol * max(1.0, abs(t)):
            raise InvalidArgument("Time {} is not on the field's grid".format(t))
        return k

    def at(self, t, x):
        """E|u_t(x)|^2 at a grid time and node."""
        return float(self.diagonal()[self.time_index(t), self.node_index(x)])

    def to_frame(self):
        """Long table with columns t, x, w, second_moment; w = x for per-node fields."""
        n_times, n_nodes = self.times.size, self.nodes.size
        if self.pairs:
            t = np.repeat(self.times, n_nodes * n_nodes)
            x = np.tile(np.repeat(self.nodes, n_nodes), n_times)
            w = np.tile(self.nodes, n_times * n_nodes)
        else:
            t = np.repeat(self.times, n_nodes)
            x = w = np.tile(self.nodes, n_times)
        return pd.DataFrame(
            {"t": t, "x": x, "w": w, "second_moment": self.values.reshape(-1)}
        )[CSV_COLUMNS]

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path
