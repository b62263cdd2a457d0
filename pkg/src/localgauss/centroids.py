"""Seeding, mean-update iteration, and collision pruning of cluster centroids.

Candidate centroids start on a regular lattice with pitch equal to the
window size, then each one walks to the mean of the points inside its
window until the step length drops below the tolerance. Centroids whose
collision boxes overlap are thinned each sweep so survivors stay separated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NoClustersError, SeedBudgetError
from .spatial import AxisBox, SpatialIndex

DEFAULT_MAX_SEEDS = 10_000_000


@dataclass
class SeedParams:
    """Knobs for seeding and centroid convergence.

    window is both the lattice pitch and the side length of the local
    window; min_count is the floor a fresh seed must reach to survive.
    """

    window: float
    min_count: int = 0
    tol: float = 0.01
    max_iter: int = 100
    max_seeds: int = DEFAULT_MAX_SEEDS

    def __post_init__(self):
        if not (self.window > 0) or not math.isfinite(self.window):
            raise ValueError("window must be positive and finite")
        if self.min_count < 0:
            raise ValueError("min_count must be >= 0")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.max_seeds < 1:
            raise ValueError("max_seeds must be >= 1")


@dataclass
class Centroid:
    """One candidate cluster center and its current window membership."""

    id: int
    mu: np.ndarray
    count: int = 0
    members: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    alive: bool = True
    converged: bool = False
    iterations: int = 0


def lattice_axes(bounds, window: float) -> list:
    """Per-axis lattice nodes min + j*window for j = 0..ceil(span/window).

    The last node overhangs the data so every point sits inside at least
    one seed window.
    """
    axes = []
    for lo, span in zip(bounds.min, bounds.span):
        steps = math.ceil(span / window) if span > 0 else 0
        axes.append(lo + window * np.arange(steps + 1))
    return axes


def seed_grid(index: SpatialIndex, params: SeedParams) -> list:
    """Lay seeds on the lattice and populate each window's count and members.

    Raises SeedBudgetError when the lattice would exceed params.max_seeds.
    """
    axes = lattice_axes(index.bounds, params.window)
    total = math.prod(len(a) for a in axes)
    if total > params.max_seeds:
        raise SeedBudgetError(
            f"lattice would hold {total} seeds (cap {params.max_seeds}); "
            f"increase the window size"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    positions = np.stack([m.ravel() for m in mesh], axis=1)

    half = params.window / 2.0
    counts = index.count_many(positions, half)
    # ids fetched only where the window is non-empty; an empty window has
    # exactly the empty member set either way
    nonzero = np.flatnonzero(counts)
    member_lists = index.query_many(positions[nonzero], half) if nonzero.size else []
    members = {int(i): m for i, m in zip(nonzero, member_lists)}

    seeds = []
    for i, pos in enumerate(positions):
        seeds.append(
            Centroid(
                id=i,
                mu=pos.copy(),
                count=int(counts[i]),
                members=members.get(i, np.empty(0, dtype=np.int64)),
            )
        )
    return seeds


def prune_low_count(centroids: list, min_count: int) -> list:
    """Drop seeds below the count floor; empty windows go even at floor 0."""
    floor = max(min_count, 1)
    return [c for c in centroids if c.count >= floor]


def update_centroid(
    c: Centroid, index: SpatialIndex, window: float, tol: float = 0.0
) -> Centroid:
    """One mean step: move to the members' mean, then refresh the window.

    c.members must describe the window at the current c.mu; the refreshed
    membership at the new position is left on the centroid so the invariant
    holds for the next step. Sets c.converged when the Euclidean step length
    falls below tol. A centroid whose new window is empty dies.
    """
    mu_new = index.points.points[c.members].mean(axis=0)
    moved = float(np.linalg.norm(mu_new - c.mu))
    ids = index.range_query(AxisBox(mu_new, window / 2.0))
    c.mu = mu_new
    c.iterations += 1
    c.members = ids
    c.count = int(ids.size)
    if ids.size == 0:
        c.alive = False
        return c
    if moved < tol:
        c.converged = True
    return c


def collides(a: Centroid, b: Centroid, window: float) -> bool:
    """True when the collision boxes overlap: |a.mu - b.mu| < window on every axis.

    The collision box side is twice the window, so the pair test reduces to
    a strict per-axis gap check. Fresh lattice neighbours sit exactly one
    window apart and do not collide.
    """
    return bool(np.all(np.abs(a.mu - b.mu) < window))


def resolve_collisions(centroids: list, window: float) -> list:
    """Kill the lower-count member of every colliding alive pair.

    Pairs are visited sorted by (min id, max id); count ties kill the
    higher id. On return no alive pair collides.
    """
    alive = sorted((c for c in centroids if c.alive), key=lambda c: c.id)
    for i, a in enumerate(alive):
        for b in alive[i + 1 :]:
            if not a.alive:
                break
            if not b.alive:
                continue
            if collides(a, b, window):
                if a.count < b.count or (a.count == b.count and a.id > b.id):
                    a.alive = False
                else:
                    b.alive = False
    return centroids


def converge_all(
    centroids: list,
    index: SpatialIndex,
    params: SeedParams,
    threads: int = 1,
) -> list:
    """Sweep mean updates with collision pruning until everything settles.

    Each sweep updates every alive, not-yet-converged centroid, then thins
    collisions among all alive centroids. Stops when all alive centroids
    have converged or the sweep cap is hit; survivors keep their final
    window membership.
    """
    alive = [c for c in centroids if c.alive]
    if not alive:
        raise NoClustersError("no seeds survived; decrease min_count or adjust the window")

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for _ in range(params.max_iter):
            movers = [c for c in alive if not c.converged]
            if not movers:
                break
            if pool is not None:
                list(
                    pool.map(
                        lambda c: update_centroid(c, index, params.window, params.tol),
                        movers,
                    )
                )
            else:
                for c in movers:
                    update_centroid(c, index, params.window, params.tol)
            alive = [c for c in alive if c.alive]
            resolve_collisions(alive, params.window)
            alive = [c for c in alive if c.alive]
            if not alive:
                raise NoClustersError(
                    "every centroid died during iteration; adjust the window"
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return alive
