# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Batched-means estimation of E|u_t(x)|^p and the sup/inf aggregates over D and D_eps."""

import logging

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from utils_spde.common.exceptions import BlowUpDetected, InvalidArgument

logger = logging.getLogger(__name__)

N_BATCHES = 20
MIN_PATHS = 100

POINT = "point"
SUP_D = "sup_D"
INF_D_EPS = "inf_D_eps"

CSV_COLUMNS = ["t", "x", "p", "lambda", "estimate", "stderr", "n_paths", "aggregate"]
COLUMNS = CSV_COLUMNS + ["log_estimate", "reliable"]


class MomentTable(object):
    """Moment estimates indexed by (t, x, p, lambda, aggregate).

    Args:
        frame (pandas.DataFrame): Rows with the columns of `COLUMNS`.
    """

    def __init__(self, frame):
        missing = set(COLUMNS) - set(frame.columns)
        if missing:
            raise InvalidArgument("Moment table misses columns {}".format(sorted(missing)))
        self.frame = frame[COLUMNS].reset_index(drop=True)

    def __len__(self):
        return len(self.frame)

    def rows(self, aggregate=POINT, p=None, lam=None):
        frame = self.frame[self.frame["aggregate"] == aggregate]
        if p is not None:
            frame = frame[frame["p"] == p]
        if lam is not None:
            frame = frame[np.isclose(frame["lambda"], lam)]
        return frame

    def series(self, aggregate, p, lam, x=None):
        """Rows of one (aggregate, p, lambda[, x]) sorted by time."""
        frame = self.rows(aggregate, p, lam)
        if x is not None:
            frame = frame[np.isclose(frame["x"], x)]
        return frame.sort_values("t")

    @classmethod
    def concat(cls, tables):
        return cls(pd.concat([t.frame for t in tables], ignore_index=True))

    @classmethod
    def from_second_moment(cls, field, lam, eps=0.25):
        """Wraps a deterministic second-moment field as a p = 2 table with zero stderr.

        Args:
            field (SecondMomentField): Oracle output; its diagonal E|u_t(x)|^2 is used.
            lam (float): Noise level the field was computed at.
            eps (float, optional): D_eps for the inf aggregate.
        """
        diagonal = field.diagonal()
        with np.errstate(divide="ignore"):
            log_values = np.log(diagonal)
        records = []
        for i, t in enumerate(field.times):
            for j, x in enumerate(field.nodes):
                records.append(
                    (t, x, 2, lam, diagonal[i, j], 0.0, 0, POINT, log_values[i, j], True)
                )
        points = pd.DataFrame.from_records(records, columns=COLUMNS)
        return cls(with_aggregates(points, eps))

    def to_csv(self, path, extended=False):
        columns = COLUMNS if extended else CSV_COLUMNS
        self.frame[columns].to_csv(path, index=False, lineterminator="\n")
        return path


def with_aggregates(points, eps):
    """Adds sup_D and inf_D_eps rows to a frame of point rows.

    The aggregates take the extreme estimate over the nodes present, keeping the x
    and stderr of the extreme row, so inf_D_eps <= point <= sup_D holds exactly.
    """
    aggregates = []
    for _, group in points.groupby(["t", "p", "lambda"], sort=True):
        top = group.loc[group["log_estimate"].idxmax()].copy()
        top["aggregate"] = SUP_D
        aggregates.append(top)
        inner = group[np.abs(group["x"]) <= 1.0 - eps]
        if len(inner):
            bottom = inner.loc[inner["log_estimate"].idxmin()].copy()
            bottom["aggregate"] = INF_D_EPS
            aggregates.append(bottom)
    return pd.concat([points, pd.DataFrame(aggregates)], ignore_index=True)


def _batched_log_mean(log_values):
    """Log of the mean of exp(log_values) along axis 0, and the batched-means stderr.

    Returns:
        tuple: (log_mean, stderr) where stderr is on the linear scale; it is inf when the
            mean itself overflows.
    """
    n = log_values.shape[0]
    log_mean = logsumexp(log_values, axis=0) - np.log(n)
    batch_logs = np.stack(
        [
            logsumexp(batch, axis=0) - np.log(batch.shape[0])
            for batch in np.array_split(log_values, N_BATCHES, axis=0)
        ]
    )
    with np.errstate(invalid="ignore", over="ignore"):
        relative = np.exp(batch_logs - log_mean)
        relative = np.where(np.isfinite(log_mean), relative, 0.0)
        spread = np.std(relative, axis=0, ddof=1) / np.sqrt(N_BATCHES)
        stderr = np.exp(log_mean) * spread
    return log_mean, np.nan_to_num(stderr, nan=0.0)


def estimate_moments(bundle, p_list=(2, 4), nodes=None, eps=0.25, grid_nodes=None):
    """Estimates E|u_t(x)|^p from simulated paths.

    Paths are split into 20 batches in path-id order; the estimate is the overall mean
    and the stderr is the standard deviation of the batch means over sqrt(20). Means
    are accumulated in log space.

    Args:
        bundle (PathBundle): Output of `simulate_paths`.
        p_list (iterable, optional): Moment orders, each >= 2.
        nodes (iterable, optional): Node indices to report. Defaults to all nodes.
        eps (float, optional): D_eps for the inf aggregate.
        grid_nodes (numpy.ndarray, optional): Node coordinates; defaults to the
            cell-centred grid with as many cells as the bundle has columns.

    Returns:
        MomentTable: Point rows plus sup_D / inf_D_eps aggregate rows. If any path blew
            up, every row is marked unreliable and only finite paths are averaged.

    Raises:
        BlowUpDetected: If fewer than 20 paths stayed finite.
    """
    n_paths, _, n_cells = bundle.values.shape
    if n_paths < MIN_PATHS:
        raise InvalidArgument("Need at least {} paths, got {}".format(MIN_PATHS, n_paths))
    if any(p < 2 for p in p_list):
        raise InvalidArgument("Moment orders must be >= 2: {}".format(p_list))
    if grid_nodes is None:
        grid_nodes = (2.0 * np.arange(n_cells) + 1.0 - n_cells) / n_cells
    nodes = np.arange(n_cells) if nodes is None else np.asarray(nodes)
    reliable = not bool(np.any(bundle.blown_up))
    finite = bundle.values[~np.asarray(bundle.blown_up)][:, :, nodes]
    if finite.shape[0] < N_BATCHES:
        blown = np.asarray(bundle.path_ids)[np.asarray(bundle.blown_up)]
        raise BlowUpDetected(
            "Only {} of {} paths stayed finite at lam={}, need {} for batched means".format(
                finite.shape[0], n_paths, bundle.lam, N_BATCHES
            ),
            blown,
        )
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(finite))

    records = []
    for p in p_list:
        log_mean, stderr = _batched_log_mean(p * log_abs)
        with np.errstate(over="ignore"):
            estimate = np.exp(log_mean)
        for i, t in enumerate(bundle.times):
            for j, k in enumerate(nodes):
                records.append(
                    (
                        float(t),
                        float(grid_nodes[k]),
                        p,
                        float(bundle.lam),
                        estimate[i, j],
                        stderr[i, j],
                        finite.shape[0],
                        POINT,
                        log_mean[i, j],
                        reliable,
                    )
                )
    if not reliable:
        logger.warning(
            "{} blown-up paths excluded, moment rows marked unreliable".format(
                int(np.sum(bundle.blown_up))
            )
        )
    points = pd.DataFrame.from_records(records, columns=COLUMNS)
    return MomentTable(with_aggregates(points, eps))


def jensen_violations(table, p_high=4, p_low=2, n_se=3.0):
    """Point rows where (E|u|^p_low)^(p_high/p_low) exceeds E|u|^p_high by more than
    `n_se` combined standard errors."""
    keys = ["t", "x", "lambda"]
    low = table.rows(POINT, p_low).set_index(keys)
    high = table.rows(POINT, p_high).set_index(keys)
    joined = low.join(high, lsuffix="_low", rsuffix="_high", how="inner")
    power = p_high / p_low
    lhs = joined["estimate_low"] ** power
    lhs_se = power * joined["estimate_low"] ** (power - 1.0) * joined["stderr_low"]
    combined = np.sqrt(lhs_se ** 2 + joined["stderr_high"] ** 2)
    return joined[lhs > joined["estimate_high"] + n_se * combined].reset_index()
