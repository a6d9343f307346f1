"""Frank-Wolfe solver for strongly convex-concave saddle problems.

The solver iterates on the stacked variable z = (x, y): it evaluates the
partial gradients, calls the linear minimization oracle of the product set
on the stacked direction (grad_x, -grad_y), and moves by convex combination.
No projections are used anywhere in the loop.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .counting import OracleCounters

TRACE_MAXLEN = 100_000


@dataclass(frozen=True)
class SaddleProblem:
    """min over set_x, max over set_y of a smooth strongly convex-concave F.

    grad_x/grad_y take (x, y) and return the partial gradients. `value` is
    optional and only needed by callers that want certified objective bounds
    (e.g. early-stop rules).
    """

    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_y: Callable[[np.ndarray, np.ndarray], np.ndarray]
    set_x: object
    set_y: object
    mu_x: float = 0.0
    mu_y: float = 0.0
    L0: float = 0.0
    L_xy: float = 0.0
    L_yx: float = 0.0
    value: Optional[Callable[[np.ndarray, np.ndarray], float]] = None

    @property
    def dim(self) -> int:
        return self.set_x.dim + self.set_y.dim

    def split(self, z: np.ndarray):
        nx = self.set_x.dim
        return z[:nx], z[nx:]


@dataclass(frozen=True)
class Adaptive:
    """Gap-proportional stepsize alpha_k = min(1, nu/(2C) * fw_gap)."""

    nu: float
    C: float

    def __post_init__(self):
        if self.nu <= 0 or self.C <= 0:
            raise ValueError("Adaptive rule requires nu > 0 and C > 0")

    def alpha(self, k: int, fw_gap: float) -> float:
        return min(1.0, max(0.0, self.nu / (2.0 * self.C) * fw_gap))


@dataclass(frozen=True)
class Harmonic:
    """Open-loop stepsize alpha_k = 2/(2 + k).

    `offset` shifts the schedule, which keeps warm starts from being wiped
    out by the initial full-length steps.
    """

    offset: int = 0

    def alpha(self, k: int, fw_gap: float) -> float:
        return 2.0 / (2.0 + k + self.offset)


StepsizeRule = Union[Adaptive, Harmonic]


@dataclass
class SaddleResult:
    z: np.ndarray
    fw_gap: float
    iterations: int
    converged: bool
    trace: Optional[list] = None
    stopped_early: bool = False


@dataclass(frozen=True)
class InnerInfo:
    """Per-iteration view handed to solve_saddle's stop callback."""

    k: int
    z: np.ndarray
    fw_gap: float
    gap_x: float
    gap_y: float
    problem: SaddleProblem


def saddle_gradient(problem: SaddleProblem, z: np.ndarray) -> np.ndarray:
    """Stacked direction (grad_x F, -grad_y F) at z = (x, y)."""
    x, y = problem.split(np.asarray(z, dtype=float))
    return np.concatenate([problem.grad_x(x, y), -problem.grad_y(x, y)])


def solve_saddle(
    problem: SaddleProblem,
    rule: StepsizeRule,
    epsilon: float,
    max_iter: int,
    z0: np.ndarray,
    stop_callback: Optional[Callable[[InnerInfo], bool]] = None,
    counters: Optional[OracleCounters] = None,
    record_trace: bool = False,
) -> SaddleResult:
    """Run the Frank-Wolfe loop until the FW gap drops to epsilon.

    Returns the first iterate with fw_gap <= epsilon, or the max_iter-th
    iterate with converged=False. Each iterate is a convex combination of
    feasible points, so feasibility is preserved throughout. One stacked LMO
    call is counted per iteration.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    z = np.asarray(z0, dtype=float).copy()
    x0, y0 = problem.split(z)
    if not (problem.set_x.contains(x0) and problem.set_y.contains(y0)):
        raise ValueError("z0 is not feasible in set_x x set_y")

    trace = deque(maxlen=TRACE_MAXLEN) if record_trace else None
    nx = problem.set_x.dim
    fw_gap = math.inf
    for k in range(max_iter + 1):
        x, y = z[:nx], z[nx:]
        rx = problem.grad_x(x, y)
        ry = -problem.grad_y(x, y)
        sx = problem.set_x.lmo(rx)
        sy = problem.set_y.lmo(ry)
        if counters is not None:
            counters.lmo += 1
        gap_x = float((x - sx) @ rx)
        gap_y = float((y - sy) @ ry)
        fw_gap = gap_x + gap_y
        if trace is not None:
            trace.append((k, fw_gap))
        if fw_gap <= epsilon:
            return SaddleResult(z, fw_gap, k, True, list(trace) if trace else None)
        if stop_callback is not None and stop_callback(
            InnerInfo(k, z, fw_gap, gap_x, gap_y, problem)
        ):
            return SaddleResult(
                z, fw_gap, k, False, list(trace) if trace else None, stopped_early=True
            )
        if k == max_iter:
            break
        alpha = rule.alpha(k, fw_gap)
        z = (1.0 - alpha) * z + alpha * np.concatenate([sx, sy])
    return SaddleResult(z, fw_gap, max_iter, False, list(trace) if trace else None)


@dataclass
class ProjectionResult:
    point: np.ndarray
    fw_gap: float
    iterations: int
    converged: bool


class _AfwBlock:
    """Away-step Frank-Wolfe state for 0.5 ||u - target||^2 over one set."""

    def __init__(self, feasible_set, target: np.ndarray, start: np.ndarray):
        self.set = feasible_set
        self.target = target
        self.atoms = [np.asarray(start, dtype=float).copy()]
        self.weights = [1.0]
        self.u = self.atoms[0].copy()

    def gap(self) -> float:
        grad = self.u - self.target
        s = self.set.lmo(grad)
        self._grad, self._s = grad, s
        return float((self.u - s) @ grad)

    def step(self, fw_gap: float) -> None:
        grad, s = self._grad, self._s
        scores = [float(a @ grad) for a in self.atoms]
        j = int(np.argmax(scores))
        away_gap = scores[j] - float(self.u @ grad)
        if fw_gap >= away_gap:
            d = s - self.u
            gamma_max = 1.0
            new_atom = s
        else:
            d = self.u - self.atoms[j]
            w_j = self.weights[j]
            gamma_max = w_j / (1.0 - w_j) if w_j < 1.0 else math.inf
            new_atom = None
        dd = float(d @ d)
        if dd <= 0.0:
            return
        gamma = min(max(-float(grad @ d) / dd, 0.0), gamma_max)
        self.u = self.u + gamma * d
        if new_atom is not None:
            if gamma >= 1.0:
                self.atoms, self.weights = [new_atom], [1.0]
            else:
                self.weights = [w * (1.0 - gamma) for w in self.weights]
                for i, a in enumerate(self.atoms):
                    if np.array_equal(a, new_atom):
                        self.weights[i] += gamma
                        break
                else:
                    self.atoms.append(new_atom)
                    self.weights.append(gamma)
        else:
            self.weights = [w * (1.0 + gamma) for w in self.weights]
            self.weights[j] -= gamma
        keep = [i for i, w in enumerate(self.weights) if w > 1e-15]
        self.atoms = [self.atoms[i] for i in keep]
        self.weights = [self.weights[i] for i in keep]


def project_with_lmo(
    feasible_set,
    target: np.ndarray,
    epsilon: float,
    max_iter: int,
    start: Optional[np.ndarray] = None,
    counters: Optional[OracleCounters] = None,
) -> ProjectionResult:
    """Euclidean projection of `target` computed with LMO calls only.

    Runs away-step Frank-Wolfe with exact line search on the 1-strongly
    convex objective 0.5 ||u - target||^2, which converges linearly on
    polytopes. The FW gap upper-bounds the objective error, so on exit
    ||u - proj(target)||^2 <= 2 * fw_gap. The starting point (any feasible
    point) is kept as an atom of the convex-combination representation.

    On a product set the objective separates, so each block keeps its own
    atom set and line search; one stacked LMO is counted per round and a
    block is only stepped while it still carries a meaningful share of the
    gap. This avoids a single stepsize being throttled by blocks that have
    already converged.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    target = np.asarray(target, dtype=float)
    if start is None:
        start = feasible_set.lmo(-target)
        if counters is not None:
            counters.lmo += 1
    start = np.asarray(start, dtype=float)
    sets = getattr(feasible_set, "blocks", None)
    if sets is None:
        spans = [(0, target.shape[0])]
        sets = [feasible_set]
    else:
        spans = list(feasible_set.offsets)
    blocks = [
        _AfwBlock(s, target[a:b], start[a:b]) for s, (a, b) in zip(sets, spans)
    ]
    step_floor = epsilon / (2.0 * len(blocks))
    fw_gap = math.inf
    for k in range(max_iter + 1):
        gaps = [blk.gap() for blk in blocks]
        if counters is not None:
            counters.lmo += 1
        fw_gap = sum(gaps)
        if fw_gap <= epsilon or k == max_iter:
            u = np.concatenate([blk.u for blk in blocks])
            return ProjectionResult(u, fw_gap, k, fw_gap <= epsilon)
        for blk, g in zip(blocks, gaps):
            if g > step_floor:
                blk.step(g)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class RateConstants:
    """Constants of the geometric-rate stepsize for interior saddle points."""

    sigma_mu: float
    nu: float
    C: float
    rho: float

    @property
    def adaptive_ok(self) -> bool:
        return self.nu > 0


def rate_constants(
    D_x: float,
    D_y: float,
    L0: float,
    L_xy: float,
    L_yx: float,
    mu_x: float,
    mu_y: float,
    sigma_x: float,
    sigma_y: float,
) -> RateConstants:
    """Geometric-rate constants (sigma_mu, nu, C, rho) from problem data.

    sigma_x/sigma_y are the distances of the saddle point to the respective
    set boundaries. When nu <= 0 the adaptive rule is inapplicable and the
    caller must fall back to the harmonic schedule.
    """
    for name, v in [
        ("D_x", D_x), ("D_y", D_y), ("L0", L0), ("mu_x", mu_x),
        ("mu_y", mu_y), ("sigma_x", sigma_x), ("sigma_y", sigma_y),
    ]:
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    if L_xy < 0 or L_yx < 0:
        raise ValueError("cross-smoothness constants must be nonnegative")
    sigma_mu = math.sqrt(min(mu_x * sigma_x**2, mu_y * sigma_y**2))
    C = (L0 * D_x**2 + L0 * D_y**2) / 2.0
    nu = 1.0 - (math.sqrt(2.0) / sigma_mu) * max(
        D_x * L_xy / math.sqrt(mu_y), D_y * L_yx / math.sqrt(mu_x)
    )
    rho = nu**2 * sigma_mu**2 / (2.0 * C)
    return RateConstants(sigma_mu=sigma_mu, nu=nu, C=C, rho=rho)
