"""Projected baseline methods checked against hand-rolled recurrences.

Every method's update rule is re-implemented here directly on top of numpy
(with the test's own clip-based projection), so agreement is evidence about
the solver, not a tautology.
"""

import math

import numpy as np
import pytest

from fwvip.baselines import (
    GOLDEN,
    METHODS,
    BaselineConfig,
    natural_residual,
    solve_baseline,
)
from fwvip.counting import OracleCounters
from fwvip.operators import make_affine_instance
from fwvip.vip import VIProblem


def small_problem(dim=5, mu=1.0, skew=2.0, seed=11):
    op, box = make_affine_instance(dim, mu, skew, seed)
    return VIProblem(op.as_field(), box, mu=op.mu(), L=op.lipschitz()), op, box


def clip_proj(box, p):
    return np.minimum(np.maximum(p, box.lower), box.upper)


def run_method(method, n_iter, problem, **cfg):
    res = solve_baseline(problem, BaselineConfig(method, **cfg),
                         tol=1e-300, max_iter=n_iter, keep_iterates=True,
                         record_wall_time=False)
    return res


class TestHandRolledRecurrences:
    def test_pgd(self):
        problem, op, box = small_problem()
        alpha = 0.5 * problem.mu / problem.L**2
        res = run_method("PGD", 15, problem, alpha=alpha)
        x = box.center()
        for rec in res.records[1:]:
            x = clip_proj(box, x - alpha * (op.matrix @ x + op.offset))
            assert np.allclose(rec.x, x, atol=1e-14)

    def test_extragradient(self):
        problem, op, box = small_problem()
        alpha = 0.5 / problem.L
        res = run_method("Extragradient", 15, problem, alpha=alpha)
        g = lambda z: op.matrix @ z + op.offset
        x = box.center()
        for rec in res.records[1:]:
            y = clip_proj(box, x - alpha * g(x))
            x = clip_proj(box, x - alpha * g(y))
            assert np.allclose(rec.x, x, atol=1e-14)

    def test_projected_reflected(self):
        problem, op, box = small_problem()
        alpha = 0.3 * (math.sqrt(2) - 1) / problem.L
        res = run_method("ProjectedReflected", 15, problem, alpha=alpha)
        g = lambda z: op.matrix @ z + op.offset
        x_prev = x = box.center()
        for rec in res.records[1:]:
            x_new = clip_proj(box, x - alpha * g(2.0 * x - x_prev))
            x_prev, x = x, x_new
            assert np.allclose(rec.x, x, atol=1e-14)

    def test_nag(self):
        problem, op, box = small_problem()
        mu, L = problem.mu, problem.L
        res = run_method("NAG", 15, problem)
        g = lambda z: op.matrix @ z + op.offset
        x0 = box.center()
        A, c = 1.0, mu * x0 - g(x0)
        for rec in res.records[1:]:
            x_k = clip_proj(box, c / (mu * A))
            y = clip_proj(box, x_k - g(x_k) / L)
            alpha = (mu / L) * A
            c = c + alpha * (mu * y - g(y))
            A += alpha
            assert np.allclose(rec.x, x_k, atol=1e-14)
            assert rec.residual == pytest.approx(float(np.linalg.norm(x_k - y)), abs=1e-14)

    def test_golden_ratio(self):
        problem, op, box = small_problem()
        zeta = GOLDEN
        alpha = 0.3 / (zeta * problem.L)
        res = run_method("GoldenRatio", 15, problem, alpha=alpha, zeta=zeta)
        g = lambda z: op.matrix @ z + op.offset
        x = y = box.center()
        for rec in res.records[1:]:
            y = (1.0 - zeta) * x + zeta * y
            x = clip_proj(box, y - alpha * g(x))
            assert np.allclose(rec.x, x, atol=1e-14)

    def test_adaptive_golden_ratio(self):
        problem, op, box = small_problem()
        zeta = GOLDEN
        alpha0 = 0.3 / (zeta * problem.L)
        res = run_method("AdaptiveGoldenRatio", 15, problem, alpha=alpha0, zeta=zeta)
        g = lambda z: op.matrix @ z + op.offset
        x = y = box.center()
        hist = [alpha0, alpha0]
        x_prev = gx_prev = None
        for rec in res.records[1:]:
            gx = g(x)
            alpha = alpha0
            if x_prev is not None:
                dg2 = float(np.sum((gx - gx_prev) ** 2))
                dx2 = float(np.sum((x - x_prev) ** 2))
                first = (zeta + zeta**2) * hist[-1]
                alpha = first if dg2 == 0.0 else min(
                    first, dx2 / (4.0 * zeta**2 * hist[-2] * dg2))
                hist = [hist[-1], alpha]
            x_prev, gx_prev = x.copy(), gx
            y = (1.0 - zeta) * x + zeta * y
            x = clip_proj(box, y - alpha * gx)
            assert np.allclose(rec.x, x, atol=1e-14)


class TestCounterExactness:
    """Cumulative oracle counts must equal the per-step formulas exactly."""

    # (proj per step, g_evals per step, extra g at setup)
    PER_STEP = {
        "PGD": (1, 1, 0),
        "Extragradient": (2, 2, 0),
        "ProjectedReflected": (1, 1, 0),
        "NAG": (2, 2, 1),
        "GoldenRatio": (1, 1, 0),
        "AdaptiveGoldenRatio": (1, 1, 0),
    }

    @pytest.mark.parametrize("method", METHODS)
    def test_counts_match_formula(self, method):
        problem, _, _ = small_problem()
        n = 23
        res = run_method(method, n, problem)
        proj_rate, g_rate, g_setup = self.PER_STEP[method]
        c = res.counters
        assert c.proj == proj_rate * n
        assert c.g_evals == g_rate * n + g_setup
        assert c.lmo == 0
        # one diagnostic projection per residual probe, except NAG whose
        # residual falls out of the step itself
        expected_diag = 1 if method == "NAG" else n + 1
        assert c.diag_proj == expected_diag

    @pytest.mark.parametrize("method", METHODS)
    def test_cumulative_counts_in_records_are_monotone(self, method):
        problem, _, _ = small_problem()
        res = run_method(method, 10, problem)
        for prev, cur in zip(res.records, res.records[1:]):
            assert cur.iter == prev.iter + 1
            assert cur.cum_proj >= prev.cum_proj
            assert cur.cum_g_evals >= prev.cum_g_evals
            assert cur.cum_diag_proj >= prev.cum_diag_proj
            assert cur.wall_ns == 0


class TestConvergence:
    @pytest.mark.parametrize("method", METHODS)
    def test_reaches_tolerance_on_affine(self, method, affine20, affine20_ref):
        res = solve_baseline(affine20, BaselineConfig(method), tol=1e-8,
                             max_iter=200_000)
        assert res.converged
        assert res.residual <= 1e-8
        assert np.linalg.norm(res.x - affine20_ref) <= 1e-6

    def test_natural_residual_zero_at_solution(self, affine20, affine20_ref):
        assert natural_residual(affine20, affine20_ref) <= 1e-10

    def test_residual_positive_away_from_solution(self, affine20):
        box = affine20.feasible_set
        assert natural_residual(affine20, box.lower) > 1e-3

    def test_converged_run_stops_early(self):
        problem, _, _ = small_problem()
        res = solve_baseline(problem, BaselineConfig("Extragradient"), tol=1e-6,
                             max_iter=100_000)
        assert res.converged and res.iterations < 100_000
        assert res.records[-1].iter == res.iterations


class TestValidation:
    def test_unknown_method_raises(self):
        with pytest.raises(ValueError, match="unknown baseline"):
            BaselineConfig("Newton").resolved(1.0, 2.0)

    @pytest.mark.parametrize("method,bad", [
        ("PGD", 10.0),
        ("Extragradient", 1.0),
        ("ProjectedReflected", 1.0),
        ("GoldenRatio", 2.0),
    ])
    def test_out_of_range_stepsize_raises(self, method, bad):
        with pytest.raises(ValueError):
            BaselineConfig(method, alpha=bad).resolved(1.0, 2.0)

    def test_out_of_range_zeta_raises(self):
        with pytest.raises(ValueError):
            BaselineConfig("GoldenRatio", zeta=0.9).resolved(1.0, 2.0)

    def test_infeasible_start_raises(self):
        problem, _, box = small_problem()
        with pytest.raises(ValueError, match="feasible"):
            solve_baseline(problem, BaselineConfig("PGD"), x0=box.upper + 1.0)

    def test_defaults_are_inside_stability_ranges(self):
        for method in METHODS:
            cfg = BaselineConfig(method).resolved(1.0, 4.0)
            if method != "NAG":  # NAG's schedule has no stepsize parameter
                assert cfg.alpha is not None and cfg.alpha > 0
