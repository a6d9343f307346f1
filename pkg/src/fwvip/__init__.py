"""Projection-free solvers for strongly monotone variational inequalities.

The core method replaces every projection with linear minimization oracle
calls: an accelerated outer loop aggregates operator evaluations into a
quadratic model, and each of its two subproblems is a strongly
convex-concave saddle problem solved by Frank-Wolfe iterations. Projected
baselines, a synthetic affine generator, and a ring-road traffic assignment
benchmark round out the toolkit.
"""

from .baselines import BaselineConfig, BaselineResult, solve_baseline
from .counting import OracleCounters
from .geometry import Box, ProductSet, ScaledSimplex, diameter, lmo, project
from .operators import (
    AffineOperator,
    ConstantsEstimate,
    VectorField,
    estimate_constants,
    make_affine_instance,
    make_rng,
)
from .saddle import (
    Adaptive,
    Harmonic,
    ProjectionResult,
    SaddleProblem,
    SaddleResult,
    project_with_lmo,
    solve_saddle,
)
from .vip import (
    GapCertificate,
    VIProblem,
    VipOptions,
    VipResult,
    gap_upper_bound,
    solve_subproblem,
    solve_vip,
)

__all__ = [
    "Adaptive",
    "AffineOperator",
    "BaselineConfig",
    "BaselineResult",
    "Box",
    "ConstantsEstimate",
    "GapCertificate",
    "Harmonic",
    "OracleCounters",
    "ProductSet",
    "ProjectionResult",
    "SaddleProblem",
    "SaddleResult",
    "ScaledSimplex",
    "VIProblem",
    "VectorField",
    "VipOptions",
    "VipResult",
    "diameter",
    "estimate_constants",
    "gap_upper_bound",
    "lmo",
    "make_affine_instance",
    "make_rng",
    "project",
    "project_with_lmo",
    "solve_baseline",
    "solve_saddle",
    "solve_subproblem",
    "solve_vip",
]

__version__ = "0.1.0"
