"""Figure rendering for cluster results and benchmark curves.

All figures go straight to files; the Agg backend is forced so rendering
works on headless machines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Ellipse

from .assign import DROPPED, Labeling
from .spatial import PointSet


def _cov_ellipse(mu, sigma, ax, color):
    """2-sigma ellipse of the leading 2x2 covariance block."""
    vals, vecs = np.linalg.eigh(np.asarray(sigma)[:2, :2])
    angle = float(np.degrees(np.arctan2(vecs[1, 1], vecs[0, 1])))
    width, height = 4.0 * np.sqrt(np.maximum(vals[[1, 0]], 0.0))
    ax.add_patch(
        Ellipse(
            xy=(mu[0], mu[1]),
            width=width,
            height=height,
            angle=angle,
            fill=False,
            color=color,
            lw=1.5,
        )
    )


def plot_clusters(points: PointSet, labeling: Labeling, models: list, path, title=None):
    """Scatter of the first two axes colored by cluster, dropped points gray.

    1-d data gets a histogram per cluster instead. Returns the path written.
    """
    fig, ax = plt.subplots(figsize=(8, 6))
    labels = labeling.labels
    x = points.points
    cmap = plt.get_cmap("tab10")

    if points.k == 1:
        for c in range(labeling.n_clusters):
            ax.hist(x[labels == c, 0], bins=40, alpha=0.6, color=cmap(c % 10), label=f"cluster {c}")
        dropped = x[labels == DROPPED, 0]
        if dropped.size:
            ax.hist(dropped, bins=40, alpha=0.4, color="gray", label="dropped")
        ax.set_xlabel("x0")
        ax.set_ylabel("count")
    else:
        dropped = labels == DROPPED
        if dropped.any():
            ax.scatter(x[dropped, 0], x[dropped, 1], s=6, c="lightgray", marker="x", label="dropped")
        for c in range(labeling.n_clusters):
            sel = labels == c
            ax.scatter(x[sel, 0], x[sel, 1], s=6, color=cmap(c % 10), label=f"cluster {c}")
        for c, m in enumerate(models):
            color = cmap(c % 10)
            ax.scatter([m.mu[0]], [m.mu[1]], s=90, color=color, marker="X", edgecolors="black", zorder=5)
            _cov_ellipse(m.mu, m.sigma, ax, color)
        ax.set_xlabel("x0")
        ax.set_ylabel("x1")
        ax.set_aspect("equal", adjustable="datalim")

    if title:
        ax.set_title(title)
    if labeling.n_clusters <= 10:
        ax.legend(loc="best", fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_scaling(rows: list, path):
    """Log-log wall time per step against N from bench rows.

    rows are dicts with an "n" key and per-step millisecond keys.
    """
    steps = [k for k in rows[0] if k != "n"]
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(8, 6))
    for step in steps:
        ax.plot(ns, [max(r[step], 1e-3) for r in rows], marker="o", label=step)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("points")
    ax.set_ylabel("wall time (ms)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
