"""Shared fixtures: benchmark problems and high-accuracy reference solutions.

Everything expensive is session-scoped so the acceptance tests and the unit
tests share one traffic instance, one constants estimate, and one reference
equilibrium.
"""

import numpy as np
import pytest

from fwvip import baselines, tap
from fwvip.operators import estimate_constants, make_affine_instance
from fwvip.vip import VIProblem


@pytest.fixture(scope="session")
def affine20():
    """The dim-20 benchmark operator with exact constants."""
    op, box = make_affine_instance(20, 1.0, 5.0, 7)
    return VIProblem(g=op.as_field(), feasible_set=box, mu=op.mu(), L=op.lipschitz())


@pytest.fixture(scope="session")
def affine20_ref(affine20):
    """High-accuracy affine solution via long extragradient (diagnostic oracle)."""
    res = baselines.solve_baseline(
        affine20, baselines.BaselineConfig("Extragradient"),
        tol=1e-12, max_iter=1_000_000, record_wall_time=False)
    assert res.converged
    return res.x


@pytest.fixture(scope="session")
def tap_instance():
    return tap.build_instance()


@pytest.fixture(scope="session")
def tap_problem(tap_instance):
    fset = tap.feasible_set(tap_instance)

    def g(x):
        return tap.path_operator(tap_instance, x)

    est = estimate_constants(g, fset, 2000, 0)
    assert not est.nonmonotone_samples
    return VIProblem(g=g, feasible_set=fset, mu=est.mu_hat,
                     L=max(est.L_hat, est.mu_hat))


@pytest.fixture(scope="session")
def tap_ref(tap_problem):
    """High-accuracy traffic equilibrium via extragradient (diagnostic oracle)."""
    res = baselines.solve_baseline(
        tap_problem, baselines.BaselineConfig("Extragradient"),
        tol=1e-12, max_iter=1_000_000, record_wall_time=False)
    assert res.converged
    return res.x


@pytest.fixture()
def rng():
    return np.random.default_rng(np.random.Philox(12345))
