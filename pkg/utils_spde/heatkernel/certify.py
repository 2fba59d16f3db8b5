# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Sweeps that certify the heat-kernel propositions by constant fitting on a lattice.

Each proposition claims that some integral of the kernel, stripped of its
t-power and exponential factor, stays above (lower) or below (upper) a
positive constant. The sweep records the stripped value at every lattice point
and the fitted constant is its min (lower) or max (upper) over the lattice.
"""

import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from utils_spde.heatkernel.bounds import BoundConstants, Side, bound_for, fit_bound_constants
from utils_spde.noise.models import NoiseKind

logger = logging.getLogger(__name__)

DEFAULT_TIMES = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
DEFAULT_LATTICE_POINTS = (-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75)
COLUMNS = ["quantity", "t", "x", "w", "value", "normalized", "fitted_constant"]

# quantity -> side of the claimed bound
PROPOSITIONS = {
    "p1": Side.LOWER,
    "p2": Side.LOWER,
    "p2bis": Side.LOWER,
    "p11": Side.UPPER,
    "p22": Side.UPPER,
    "kernel_sandwich": Side.UPPER,
}


def lattice_nodes(grid, points=DEFAULT_LATTICE_POINTS):
    """Grid nodes nearest to `points`, without duplicates, in increasing order."""
    indices = sorted({grid.nearest_index(x) for x in points})
    return [float(grid.nodes[k]) for k in indices]


def _pair_integrals(kernel, h, mask, cov):
    """Matrix of h^2 sum_{y,z in region} p(x_i, y) p(x_j, z) fbar(y, z) over node pairs."""
    rows = kernel[:, mask]
    if cov.model.kind == NoiseKind.WHITE:
        return h * rows @ rows.T
    return h * h * rows @ cov.matrix[np.ix_(mask, mask)] @ rows.T


def certify_propositions(
    ke, cov, eps=0.25, delta=0.1, times=DEFAULT_TIMES, nodes=None, verbose=False
):
    """Runs the proposition sweeps.

    Args:
        ke (KernelEvaluator): Kernel on the simulation grid.
        cov (SpatialCovariance): Noise covariance used for the correlated integrals.
        eps (float, optional): Shrinking of D_eps. Defaults to 0.25.
        delta (float, optional): Slack of the exponential in the upper correlated bound.
        times (iterable, optional): Lattice times.
        nodes (list, optional): Lattice nodes; defaults to the nodes nearest to
            -0.75, -0.5, ..., 0.75.
        verbose (bool, optional): Show a progress bar.

    Returns:
        pandas.DataFrame: Rows with columns quantity, t, x, w, value, normalized,
            fitted_constant.
    """
    grid = ke.grid
    h = grid.h
    alpha, d = ke.basis.alpha, ke.basis.d
    mu1 = ke.mu1
    a = cov.model.scaling_exponent
    nodes = lattice_nodes(grid) if nodes is None else list(nodes)
    index = np.array([grid.index_of(x) for x in nodes])
    inner = np.abs(np.array(nodes)) <= 1.0 - eps
    full_mask = grid.region_mask()
    eps_mask = grid.region_mask(eps)

    bound = bound_for(ke)
    consts = fit_bound_constants(ke, times, nodes)
    unit = BoundConstants(1.0, consts.c1, consts.c2)

    records = []
    for t in tqdm(times, desc="certify", disable=not verbose):
        kernel = ke.matrix(t)[index]
        mass_full = h * kernel[:, full_mask].sum(axis=1)
        mass_eps = h * kernel[:, eps_mask].sum(axis=1)
        square_eps = h * (kernel[:, eps_mask] ** 2).sum(axis=1)
        pairs_eps = _pair_integrals(kernel, h, eps_mask, cov)
        pairs_full = _pair_integrals(kernel, h, full_mask, cov)
        for i, x in enumerate(nodes):
            records.append(("p11", t, x, x, mass_full[i], np.exp(mu1 * t) * mass_full[i]))
            if inner[i]:
                records.append(("p1", t, x, x, mass_eps[i], np.exp(mu1 * t) * mass_eps[i]))
                records.append(
                    (
                        "p2",
                        t,
                        x,
                        x,
                        square_eps[i],
                        t ** (d / alpha) * np.exp(2.0 * mu1 * t) * square_eps[i],
                    )
                )
            for j, w in enumerate(nodes):
                upper = pairs_full[i, j]
                records.append(
                    (
                        "p22",
                        t,
                        x,
                        w,
                        upper,
                        t ** (a / alpha) * np.exp((2.0 - delta) * mu1 * t) * upper,
                    )
                )
                if inner[i] and inner[j] and abs(x - w) <= t ** (1.0 / alpha):
                    lower = pairs_eps[i, j]
                    records.append(
                        (
                            "p2bis",
                            t,
                            x,
                            w,
                            lower,
                            t ** (a / alpha) * np.exp(2.0 * mu1 * t) * lower,
                        )
                    )
                p = kernel[i, index[j]]
                ratio = max(
                    p / bound(ke, t, x, w, unit, Side.UPPER),
                    bound(ke, t, x, w, unit, Side.LOWER) / p,
                )
                records.append(("kernel_sandwich", t, x, w, p, ratio))

    frame = pd.DataFrame.from_records(records, columns=COLUMNS[:-1])
    fitted = {}
    for quantity, group in frame.groupby("quantity", sort=False):
        side = PROPOSITIONS[quantity]
        fitted[quantity] = group["normalized"].min() if side == Side.LOWER else group[
            "normalized"
        ].max()
    fitted["kernel_sandwich"] = consts.C
    frame["fitted_constant"] = frame["quantity"].map(fitted)
    logger.info(
        "Certified {} lattice values over {} times, kernel constant C={:.4g}".format(
            len(frame), len(times), consts.C
        )
    )
    return frame


def summarize_certification(frame):
    """Per-quantity summary: min and max of the normalized value, their ratio, and whether
    the fitted constant is finite and positive."""
    summary = frame.groupby("quantity", sort=False).agg(
        n_points=("normalized", "size"),
        normalized_min=("normalized", "min"),
        normalized_max=("normalized", "max"),
        fitted_constant=("fitted_constant", "first"),
    )
    summary["ratio"] = summary["normalized_max"] / summary["normalized_min"]
    summary["side"] = [PROPOSITIONS[q].value for q in summary.index]
    summary["certified"] = (
        np.isfinite(summary["ratio"])
        & (summary["normalized_min"] > 0)
        & np.isfinite(summary["fitted_constant"])
        & (summary["fitted_constant"] > 0)
    )
    return summary.reset_index()
