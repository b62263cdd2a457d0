"""End-to-end clustering pipeline and its run report.

Order of operations: index the points, seed the lattice, prune thin seeds,
iterate centroids with collision pruning, fit one Gaussian per survivor,
assign every point by argmax density, then apply the optional filters.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import spatial
from .assign import FilterParams, Labeling, apply_filters, assign_all
from .centroids import (
    DEFAULT_MAX_SEEDS,
    SeedParams,
    converge_all,
    prune_low_count,
    seed_grid,
)
from .errors import NoClustersError
from .gaussian import DENSITY_FORMS, FitParams, GaussianModel, RIDGE_BASE, fit_covariance
from .spatial import PointSet


@dataclass
class ClusterConfig:
    """Every knob of the pipeline; only window has no default.

    threads = 0 means use the machine's cpu count. Results are identical
    for any thread count; threads only trade wall time.
    """

    window: float
    min_count: int = 0
    centroid_tol: float = 0.01
    cov_tol: float = 0.01
    centroid_max_iter: int = 100
    cov_max_iter: int = 50
    density_form: str = "standard"
    min_density: Optional[float] = None
    trim_fraction: Optional[float] = None
    min_separation: Optional[float] = None
    ridge: float = RIDGE_BASE
    max_seeds: int = DEFAULT_MAX_SEEDS
    threads: int = 0
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if not (self.window > 0) or not math.isfinite(self.window):
            raise ValueError("window must be positive and finite")
        if self.density_form not in DENSITY_FORMS:
            raise ValueError(f"density_form must be one of {DENSITY_FORMS}")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")
        # delegate range checks to the per-stage parameter types
        self.seed_params()
        self.fit_params()
        self.filter_params()

    def seed_params(self) -> SeedParams:
        return SeedParams(
            window=self.window,
            min_count=self.min_count,
            tol=self.centroid_tol,
            max_iter=self.centroid_max_iter,
            max_seeds=self.max_seeds,
        )

    def fit_params(self) -> FitParams:
        return FitParams(
            tol=self.cov_tol,
            max_iter=self.cov_max_iter,
            ridge=self.ridge,
            density_form=self.density_form,
        )

    def filter_params(self) -> FilterParams:
        return FilterParams(
            min_density=self.min_density,
            trim_fraction=self.trim_fraction,
            min_separation=self.min_separation,
        )

    def resolved_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


@dataclass
class ClusterStats:
    """Structural facts about one fitted cluster."""

    id: int
    count: int
    centroid_iterations: int
    centroid_converged: bool
    cov_iterations: int
    cov_converged: bool
    degenerate: bool


@dataclass
class RunReport:
    """What happened during a run: sizes, timings, and per-cluster records."""

    n: int
    k: int
    threads: int
    seeds_total: int
    seeds_after_prune: int
    n_clusters: int
    step_seconds: dict = field(default_factory=dict)
    clusters: list = field(default_factory=list)
    drops: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "threads": self.threads,
            "seeds_total": self.seeds_total,
            "seeds_after_prune": self.seeds_after_prune,
            "n_clusters": self.n_clusters,
            "clusters": [asdict(c) for c in self.clusters],
            "drops": dict(self.drops),
        }
        if include_timings:
            out["step_seconds"] = dict(self.step_seconds)
        return out

    def summary(self) -> dict:
        """Deterministic subset for the model artifact; no wall-clock values."""
        out = self.to_dict(include_timings=False)
        # thread count trades wall time only; artifacts stay byte stable across it
        del out["threads"]
        return out


def run(points: PointSet, config: ClusterConfig):
    """Run the whole pipeline; returns (models, labeling, report).

    Raises NoClustersError when no centroid survives seeding and pruning.
    """
    threads = config.resolved_threads()
    steps = {}

    t0 = time.perf_counter()
    index = spatial.build(points)
    steps["index"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    seeds = seed_grid(index, config.seed_params())
    seeds_total = len(seeds)
    survivors = prune_low_count(seeds, config.min_count)
    seeds_after_prune = len(survivors)
    steps["seed"] = time.perf_counter() - t0
    if not survivors:
        raise NoClustersError(
            "no seed window reached the count floor; "
            "decrease min_count or adjust the window"
        )

    t0 = time.perf_counter()
    finals = converge_all(survivors, index, config.seed_params(), threads=threads)
    finals.sort(key=lambda c: c.id)
    steps["converge"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fit_params = config.fit_params()
    pts = index.points

    def fit_one(c):
        return fit_covariance(c.members, pts, c.mu, fit_params)

    if threads > 1 and len(finals) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            models = list(pool.map(fit_one, finals))
    else:
        models = [fit_one(c) for c in finals]
    steps["fit"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    labeling = assign_all(pts, models, form=config.density_form, threads=threads)
    steps["assign"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    labeling, drops = apply_filters(labeling, config.filter_params())
    steps["filter"] = time.perf_counter() - t0

    stats = [
        ClusterStats(
            id=i,
            count=c.count,
            centroid_iterations=c.iterations,
            centroid_converged=c.converged,
            cov_iterations=m.iterations,
            cov_converged=m.converged,
            degenerate=m.degenerate,
        )
        for i, (c, m) in enumerate(zip(finals, models))
    ]
    report = RunReport(
        n=points.n,
        k=points.k,
        threads=threads,
        seeds_total=seeds_total,
        seeds_after_prune=seeds_after_prune,
        n_clusters=len(models),
        step_seconds=steps,
        clusters=stats,
        drops=drops,
    )
    return models, labeling, report


def suggest_window(points: PointSet) -> float:
    """Rule-of-thumb window: median per-axis span divided by 20.

    Zero-span axes are ignored; if every axis is degenerate the fallback
    is 1.0. Advisory only, nothing in the pipeline calls this.
    """
    spans = spatial.Bounds.of(points).span
    live = spans[spans > 0]
    if live.size == 0:
        return 1.0
    return float(np.median(live) / 20.0)
