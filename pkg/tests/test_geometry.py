"""Geometry oracles checked against independent brute-force references.

The projection reference is a grid-plus-local-refinement search that never
calls the sorting-based implementation; the LMO reference enumerates vertices
explicitly.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fwvip.geometry import Box, ProductSet, ScaledSimplex, simplex_projection


def _compositions(total, parts):
    """All nonnegative integer tuples of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def brute_force_simplex_projection(point, mass, dim, tol=1e-7):
    """Grid search over the simplex, then pairwise-transfer refinement.

    Feasible directions on the simplex are spanned by e_j - e_i, so local
    search over pairwise mass transfers converges to the global minimizer of
    the (convex) squared distance.
    """
    grid_n = 20
    best, best_val = None, np.inf
    for comp in _compositions(grid_n, dim):
        x = np.array(comp, dtype=float) * (mass / grid_n)
        val = float(np.sum((x - point) ** 2))
        if val < best_val:
            best, best_val = x, val
    h = mass / grid_n
    while h > tol:
        improved = True
        while improved:
            improved = False
            for i, j in itertools.permutations(range(dim), 2):
                if best[i] < h:
                    continue
                cand = best.copy()
                cand[i] -= h
                cand[j] += h
                val = float(np.sum((cand - point) ** 2))
                if val < best_val - 1e-18:
                    best, best_val = cand, val
                    improved = True
        h /= 2.0
    return best


class TestSimplexProjection:
    def test_matches_brute_force_on_random_points(self):
        rng = np.random.default_rng(np.random.Philox(0))
        for trial in range(100):
            dim = int(rng.integers(2, 5))
            mass = float(rng.uniform(0.2, 3.0))
            point = rng.normal(scale=2.0, size=dim)
            got = ScaledSimplex(dim, mass).project(point)
            want = brute_force_simplex_projection(point, mass, dim)
            assert np.linalg.norm(got - want) <= 1e-6, (trial, dim, mass, point)

    def test_interior_point_is_fixed(self):
        s = ScaledSimplex(3, 1.0)
        x = np.array([0.2, 0.3, 0.5])
        assert np.allclose(s.project(x), x, atol=1e-12)

    def test_degenerate_single_coordinate(self):
        s = ScaledSimplex(1, 0.7)
        assert np.allclose(s.project([123.0]), [0.7])
        assert np.allclose(s.lmo([-5.0]), [0.7])
        assert s.diameter() == 0.0

    @given(
        dim=st.integers(2, 6),
        mass=st.floats(0.1, 10.0),
        data=st.data(),
    )
    @settings(max_examples=100, deadline=None)
    def test_projection_optimality_inequality(self, dim, mass, data):
        # <p - proj(p), v - proj(p)> <= 0 for every feasible v characterizes
        # the Euclidean projection onto a convex set
        point = np.array(data.draw(st.lists(
            st.floats(-20, 20), min_size=dim, max_size=dim)))
        s = ScaledSimplex(dim, mass)
        proj = s.project(point)
        assert s.contains(proj)
        for i in range(dim):
            v = np.zeros(dim)
            v[i] = mass
            assert float((point - proj) @ (v - proj)) <= 1e-7 * max(1.0, mass**2)

    @given(
        dim=st.integers(2, 5),
        data=st.data(),
    )
    @settings(max_examples=50, deadline=None)
    def test_projection_is_nonexpansive(self, dim, data):
        pts = st.lists(st.floats(-10, 10), min_size=dim, max_size=dim)
        p = np.array(data.draw(pts))
        q = np.array(data.draw(pts))
        s = ScaledSimplex(dim, 1.0)
        assert (np.linalg.norm(s.project(p) - s.project(q))
                <= np.linalg.norm(p - q) + 1e-9)

    def test_idempotent(self):
        rng = np.random.default_rng(np.random.Philox(1))
        s = ScaledSimplex(5, 2.0)
        for _ in range(20):
            once = s.project(rng.normal(size=5))
            assert np.allclose(s.project(once), once, atol=1e-12)


class TestLmo:
    def test_simplex_lmo_attains_vertex_minimum_exactly(self):
        rng = np.random.default_rng(np.random.Philox(2))
        for _ in range(100):
            dim = int(rng.integers(2, 6))
            mass = float(rng.uniform(0.1, 4.0))
            d = rng.normal(size=dim)
            s = ScaledSimplex(dim, mass)
            v = s.lmo(d)
            vertex_values = [mass * d[i] for i in range(dim)]
            assert float(v @ d) == min(vertex_values)
            assert s.contains(v)

    def test_box_lmo_attains_vertex_minimum_exactly(self):
        rng = np.random.default_rng(np.random.Philox(3))
        for _ in range(100):
            dim = int(rng.integers(1, 4))
            lo = rng.uniform(-2, 0, size=dim)
            hi = lo + rng.uniform(0.1, 2, size=dim)
            b = Box(lo, hi)
            d = rng.normal(size=dim)
            v = b.lmo(d)
            corners = [np.array(c) for c in itertools.product(*zip(lo, hi))]
            assert float(v @ d) == min(float(c @ d) for c in corners)

    def test_lmo_tie_breaks_to_lowest_index(self):
        s = ScaledSimplex(3, 1.0)
        assert np.allclose(s.lmo(np.array([0.5, 0.5, 1.0])), [1, 0, 0])


class TestBox:
    def test_projection_is_clip(self):
        b = Box(lower=-np.ones(3), upper=np.ones(3))
        assert np.allclose(b.project([2.0, -3.0, 0.25]), [1.0, -1.0, 0.25])

    def test_diameter_is_corner_distance(self):
        b = Box(lower=np.array([0.0, -1.0]), upper=np.array([2.0, 3.0]))
        assert b.diameter() == pytest.approx(np.hypot(2.0, 4.0))

    def test_invalid_bounds_raise(self):
        with pytest.raises(ValueError):
            Box(lower=np.array([1.0]), upper=np.array([0.0]))

    @given(hnp.arrays(float, 4, elements=st.floats(-5, 5)))
    @settings(max_examples=50, deadline=None)
    def test_membership_after_projection(self, p):
        b = Box(lower=-np.ones(4), upper=np.ones(4))
        assert b.contains(b.project(p))


class TestProductSet:
    def _product(self):
        return ProductSet((ScaledSimplex(2, 0.5), Box(-np.ones(2), np.ones(2)),
                           ScaledSimplex(3, 1.5)))

    def test_blockwise_projection_matches_blocks(self):
        ps = self._product()
        rng = np.random.default_rng(np.random.Philox(4))
        p = rng.normal(size=ps.dim)
        got = ps.project(p)
        parts = ps.split(p)
        want = np.concatenate([blk.project(part)
                               for blk, part in zip(ps.blocks, parts)])
        assert np.allclose(got, want, atol=1e-15)

    def test_blockwise_lmo_matches_blocks(self):
        ps = self._product()
        rng = np.random.default_rng(np.random.Philox(5))
        d = rng.normal(size=ps.dim)
        want = np.concatenate([blk.lmo(part)
                               for blk, part in zip(ps.blocks, ps.split(d))])
        assert np.allclose(ps.lmo(d), want, atol=1e-15)

    def test_diameter_is_euclidean_combination(self):
        ps = self._product()
        want = np.sqrt(sum(b.diameter() ** 2 for b in ps.blocks))
        assert ps.diameter() == pytest.approx(want)

    def test_sampled_points_are_members(self):
        ps = self._product()
        rng = np.random.default_rng(np.random.Philox(6))
        for x in ps.sample(rng, 25):
            assert ps.contains(x)

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            self._product().project(np.zeros(3))


def test_module_level_simplex_projection_agrees_with_class():
    rng = np.random.default_rng(np.random.Philox(7))
    p = rng.normal(size=6)
    assert np.allclose(simplex_projection(p, 2.0), ScaledSimplex(6, 2.0).project(p))
