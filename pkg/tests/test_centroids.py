"""Seeding lattice, mean updates, collision pruning, and convergence sweeps."""

import numpy as np
import pytest

from localgauss.centroids import (
    Centroid,
    SeedParams,
    collides,
    converge_all,
    prune_low_count,
    resolve_collisions,
    seed_grid,
)
from localgauss.errors import NoClustersError, SeedBudgetError
from localgauss.spatial import AxisBox, PointSet, build
from localgauss.testkit import BlobSpec, brute_force_range, gen_blobs


def _centroid(cid, mu, count=1):
    return Centroid(id=cid, mu=np.asarray(mu, dtype=float), count=count)


class TestSeedGrid:
    def test_unit_square_half_pitch(self):
        """Bounds [0,1]^2 with window 0.5 lay a 3x3 lattice at {0,.5,1}^2."""
        pts = PointSet(np.array([[0.0, 0.0], [1.0, 1.0]]))
        seeds = seed_grid(build(pts), SeedParams(window=0.5))
        assert len(seeds) == 9
        got = sorted(tuple(s.mu) for s in seeds)
        want = sorted((a, b) for a in (0.0, 0.5, 1.0) for b in (0.0, 0.5, 1.0))
        assert got == want

    def test_window_larger_than_span_overhangs(self):
        pts = PointSet(np.array([[0.0, 0.0], [1.0, 1.0]]))
        seeds = seed_grid(build(pts), SeedParams(window=2.0))
        got = sorted(tuple(s.mu) for s in seeds)
        assert got == [(0.0, 0.0), (0.0, 2.0), (2.0, 0.0), (2.0, 2.0)]

    def test_1d_lattice_nodes(self):
        pts = PointSet(np.array([[0.0], [10.0]]))
        seeds = seed_grid(build(pts), SeedParams(window=3.0))
        np.testing.assert_array_equal([s.mu[0] for s in seeds], [0.0, 3.0, 6.0, 9.0, 12.0])

    def test_counts_and_members_match_oracle(self):
        rng = np.random.default_rng(2)
        pts = PointSet(rng.uniform(0, 4, size=(200, 2)))
        idx = build(pts)
        params = SeedParams(window=1.0)
        for seed in seed_grid(idx, params):
            want = brute_force_range(pts, AxisBox(seed.mu, params.window / 2))
            assert seed.count == want.size
            np.testing.assert_array_equal(seed.members, want)

    def test_every_point_lands_in_some_window(self):
        """Lattice coverage: each point is inside at least one seed window."""
        rng = np.random.default_rng(3)
        pts = PointSet(rng.normal(0, 3, size=(500, 2)))
        seeds = seed_grid(build(pts), SeedParams(window=1.3))
        covered = np.zeros(pts.n, dtype=bool)
        for s in seeds:
            covered[s.members] = True
        assert covered.all()

    def test_seed_budget(self):
        pts = PointSet(np.array([[0.0, 0.0], [100.0, 100.0]]))
        with pytest.raises(SeedBudgetError, match="increase the window"):
            seed_grid(build(pts), SeedParams(window=0.5, max_seeds=100))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SeedParams(window=0.0)
        with pytest.raises(ValueError):
            SeedParams(window=1.0, min_count=-1)


class TestPrune:
    def test_floor_keeps_at_or_above(self):
        cents = [_centroid(0, [0], 5), _centroid(1, [1], 0), _centroid(2, [2], 12)]
        kept = prune_low_count(cents, 3)
        assert [c.id for c in kept] == [0, 2]

    def test_floor_zero_still_drops_empty(self):
        cents = [_centroid(0, [0], 1), _centroid(1, [1], 0), _centroid(2, [2], 1)]
        kept = prune_low_count(cents, 0)
        assert [c.id for c in kept] == [0, 2]

    def test_all_pruned_gives_empty(self):
        assert prune_low_count([_centroid(0, [0], 2)], 10) == []


class TestCollisions:
    def test_near_pair_collides(self):
        assert collides(_centroid(0, [0.0, 0.0]), _centroid(1, [0.8, 0.0]), 1.0)

    def test_far_axis_blocks(self):
        assert not collides(_centroid(0, [0.0, 0.0]), _centroid(1, [1.2, 0.3]), 1.0)

    def test_diagonal_inside(self):
        assert collides(_centroid(0, [0.0, 0.0]), _centroid(1, [0.9, 0.9]), 1.0)

    def test_exact_pitch_does_not_collide(self):
        """Strict inequality: fresh lattice neighbours stay apart."""
        assert not collides(_centroid(0, [0.0, 0.0]), _centroid(1, [1.0, 0.0]), 1.0)

    def test_symmetric(self):
        a, b = _centroid(0, [0.1, 0.2]), _centroid(1, [0.5, -0.3])
        assert collides(a, b, 1.0) == collides(b, a, 1.0)

    def test_lower_count_dies(self):
        a, b = _centroid(0, [0.0, 0.0], 10), _centroid(1, [0.5, 0.0], 4)
        resolve_collisions([a, b], 1.0)
        assert a.alive and not b.alive

    def test_tie_kills_higher_id(self):
        a, b = _centroid(0, [0.0, 0.0], 7), _centroid(1, [0.5, 0.0], 7)
        resolve_collisions([a, b], 1.0)
        assert a.alive and not b.alive

    def test_no_collisions_keeps_all(self):
        cents = [_centroid(i, [2.0 * i, 0.0], 5) for i in range(4)]
        resolve_collisions(cents, 1.0)
        assert all(c.alive for c in cents)

    def test_mutual_triple_keeps_heaviest(self):
        cents = [
            _centroid(0, [0.0, 0.0], 5),
            _centroid(1, [0.3, 0.0], 7),
            _centroid(2, [0.6, 0.0], 9),
        ]
        resolve_collisions(cents, 1.0)
        assert [c.alive for c in cents] == [False, False, True]

    def test_mutual_triple_survivor_is_order_independent(self):
        """Relabeling ids must not change which position survives."""
        counts = [5, 7, 9]
        positions = [[0.0, 0.0], [0.3, 0.0], [0.6, 0.0]]
        import itertools

        for perm in itertools.permutations(range(3)):
            cents = [
                _centroid(cid, positions[pos], counts[pos])
                for cid, pos in enumerate(perm)
            ]
            resolve_collisions(cents, 1.0)
            survivors = {tuple(positions[perm[i]]) for i, c in enumerate(cents) if c.alive}
            assert survivors == {(0.6, 0.0)}

    def test_no_alive_pair_collides_after(self):
        rng = np.random.default_rng(8)
        cents = [
            _centroid(i, rng.uniform(0, 3, size=2), int(rng.integers(1, 50)))
            for i in range(30)
        ]
        resolve_collisions(cents, 1.0)
        alive = [c for c in cents if c.alive]
        for i, a in enumerate(alive):
            for b in alive[i + 1 :]:
                assert not collides(a, b, 1.0)


class TestUpdate:
    def _seeded(self, pts, mu, window):
        idx = build(pts)
        members = idx.range_query(AxisBox(np.asarray(mu, dtype=float), window / 2))
        c = Centroid(id=0, mu=np.asarray(mu, dtype=float), count=members.size, members=members)
        return c, idx

    def test_moves_to_member_mean(self):
        from localgauss.centroids import update_centroid

        pts = PointSet(np.array([[0.0, 0.0], [2.0, 0.0]]))
        c, idx = self._seeded(pts, [1.0, 0.1], 6.0)
        update_centroid(c, idx, 6.0)
        np.testing.assert_allclose(c.mu, [1.0, 0.0])
        assert c.count == 2 and c.iterations == 1

    def test_single_member_is_fixed_point(self):
        from localgauss.centroids import update_centroid

        pts = PointSet(np.array([[3.0, 4.0]]))
        c, idx = self._seeded(pts, [3.2, 4.1], 1.0)
        update_centroid(c, idx, 1.0, tol=0.5)
        np.testing.assert_array_equal(c.mu, [3.0, 4.0])
        assert c.converged and c.alive

    def test_empty_window_dies(self):
        from localgauss.centroids import update_centroid

        # two far members average to a spot where the window is empty
        pts = PointSet(np.array([[0.0, 0.0], [10.0, 10.0]]))
        idx = build(pts)
        c = Centroid(id=0, mu=np.array([4.0, 4.0]), count=2,
                     members=np.array([0, 1], dtype=np.int64))
        update_centroid(c, idx, 1.0)
        assert not c.alive and c.count == 0

    def test_converges_near_window_mean(self):
        """After convergence mu matches the plain mean of its final window."""
        from localgauss.centroids import update_centroid

        rng = np.random.default_rng(17)
        pts = PointSet(rng.normal([5.0, 5.0], np.sqrt(0.1), size=(200, 2)))
        c, idx = self._seeded(pts, [4.8, 5.2], 1.0)
        for _ in range(100):
            update_centroid(c, idx, 1.0, tol=1e-6)
            if c.converged or not c.alive:
                break
        assert c.alive and c.converged
        want = brute_force_range(pts, AxisBox(c.mu, 0.5))
        np.testing.assert_allclose(c.mu, pts.points[want].mean(axis=0), atol=0.05)


class TestConvergeAll:
    def _run(self, pts, window, min_count=1, threads=1):
        idx = build(pts)
        params = SeedParams(window=window, min_count=min_count)
        seeds = prune_low_count(seed_grid(idx, params), min_count)
        return converge_all(seeds, idx, params, threads=threads)

    def test_two_blobs_two_survivors(self):
        pts, _ = gen_blobs(
            42,
            [BlobSpec.isotropic([0.0, 0.0], 1.0, 400),
             BlobSpec.isotropic([10.0, 0.0], 1.0, 400)],
        )
        finals = self._run(pts, window=4.0, min_count=5)
        assert len(finals) == 2
        mus = sorted(round(float(c.mu[0])) for c in finals)
        assert mus == [0, 10]

    def test_single_blob_single_survivor(self):
        pts, _ = gen_blobs(7, [BlobSpec.isotropic([2.0, -1.0], 0.5, 300)])
        finals = self._run(pts, window=2.0, min_count=5)
        assert len(finals) == 1
        np.testing.assert_allclose(finals[0].mu, pts.points.mean(axis=0), atol=0.2)

    def test_already_converged_exits_after_one_step(self):
        pts = PointSet(np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]))
        idx = build(pts)
        params = SeedParams(window=6.0, tol=0.01)
        # a centroid sitting at its exact local mean moves zero distance
        members = idx.range_query(AxisBox(np.zeros(2), 3.0))
        center = Centroid(id=0, mu=np.zeros(2), count=members.size, members=members)
        finals = converge_all([center], idx, params)
        assert finals[0].iterations == 1 and finals[0].converged

    def test_no_seeds_raises(self):
        pts = PointSet(np.array([[0.0, 0.0], [1.0, 1.0]]))
        idx = build(pts)
        with pytest.raises(NoClustersError):
            converge_all([], idx, SeedParams(window=1.0))

    def test_no_surviving_pair_collides(self):
        rng = np.random.default_rng(12)
        pts = PointSet(rng.uniform(0, 10, size=(600, 2)))
        finals = self._run(pts, window=1.5, min_count=1)
        for i, a in enumerate(finals):
            for b in finals[i + 1 :]:
                assert not collides(a, b, 1.5)

    def test_members_match_final_window(self):
        pts, _ = gen_blobs(9, [BlobSpec.isotropic([0.0, 0.0], 1.0, 500)])
        idx = build(pts)
        params = SeedParams(window=3.0)
        finals = converge_all(prune_low_count(seed_grid(idx, params), 1), idx, params)
        for c in finals:
            want = brute_force_range(pts, AxisBox(c.mu, 1.5))
            np.testing.assert_array_equal(c.members, want)

    def test_translation_equivariance(self):
        """Shifting the data shifts every surviving center by the same vector."""
        pts, _ = gen_blobs(
            23,
            [BlobSpec.isotropic([0.0, 0.0], 1.0, 300),
             BlobSpec.isotropic([8.0, 3.0], 1.0, 300)],
        )
        shift = np.array([64.0, -32.0])
        finals_a = self._run(pts, window=3.0, min_count=5)
        finals_b = self._run(PointSet(pts.points + shift), window=3.0, min_count=5)
        mus_a = np.array(sorted(tuple(c.mu) for c in finals_a))
        mus_b = np.array(sorted(tuple(c.mu) for c in finals_b))
        np.testing.assert_allclose(mus_b - shift, mus_a, atol=1e-9)

    def test_thread_count_does_not_change_results(self):
        pts, _ = gen_blobs(
            31,
            [BlobSpec.isotropic([0.0, 0.0], 1.0, 400),
             BlobSpec.isotropic([9.0, 9.0], 1.0, 400)],
        )
        finals_1 = self._run(pts, window=3.5, min_count=5, threads=1)
        finals_4 = self._run(pts, window=3.5, min_count=5, threads=4)
        assert len(finals_1) == len(finals_4)
        for a, b in zip(finals_1, finals_4):
            assert a.id == b.id and a.count == b.count
            np.testing.assert_array_equal(a.mu, b.mu)
            np.testing.assert_array_equal(a.members, b.members)
