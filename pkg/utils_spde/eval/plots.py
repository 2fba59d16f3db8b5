# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""SVG line charts of moment growth. Output is byte-identical across reruns."""

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib import pyplot  # noqa: E402

SVG_HASHSALT = "spde-lab"
SVG_METADATA = {"Date": None}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    pyplot.close(fig)
    return path


def plot_log_moments(
    table, path, aggregate="point", x=0.0, title="log E|u_t(x)|^p", plot_size=(6, 4)
):
    """Plots log-moment against t, one line per (p, lambda).

    Args:
        table (MomentTable): Estimates.
        path (str): Output SVG file.
        aggregate (str, optional): Aggregate of the rows plotted.
        x (float, optional): Node of "point" rows.
        title (str, optional): Plot title.
        plot_size (tuple, optional): Figure size in inches.

    Returns:
        str: The path written.
    """
    frame = table.frame
    rows = frame[frame["aggregate"] == aggregate]
    if aggregate == "point":
        rows = rows[np.isclose(rows["x"], x)]
    fig, ax = pyplot.subplots(figsize=plot_size)
    for (p, lam), group in rows.groupby(["p", "lambda"], sort=True):
        group = group.sort_values("t")
        label = "p={}, lambda={}".format(p, lam)
        ax.plot(group["t"], group["log_estimate"], marker="o", label=label)
    ax.set_title(title)
    ax.set(xlabel="t", ylabel="log moment")
    if len(ax.get_lines()):
        ax.legend(loc="best", fontsize="small")
    return _save(fig, path)


def plot_rates(rates, path, mu1=None, title="Lyapunov rate against lambda", plot_size=(6, 4)):
    """Plots p = 2 rates against lambda on log-log axes.

    With `mu1` the lambda-dependent part (rate + 2 mu1) / 2 is plotted, whose slope is
    the excitation index.

    Args:
        rates (dict): Noise level to rate.
        path (str): Output SVG file.
        mu1 (float, optional): First eigenvalue.

    Returns:
        str: The path written.
    """
    items = sorted(rates.items())
    lams = np.array([lam for lam, _ in items], dtype=float)
    values = np.array([r for _, r in items], dtype=float)
    if mu1 is not None:
        values = (values + 2.0 * mu1) / 2.0
    keep = (lams > 0) & (values > 0)
    fig, ax = pyplot.subplots(figsize=plot_size)
    ax.plot(lams[keep], values[keep], marker="o")
    if keep.any():
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set(xlabel="lambda", ylabel="rate")
    return _save(fig, path)
