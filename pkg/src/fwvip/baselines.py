"""Projected reference methods for strongly monotone variational inequalities:
projected gradient, extragradient, accelerated (momentum) gradient, projected
reflected gradient, and the golden ratio method with optional adaptive steps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .counting import OracleCounters
from .vip import VIProblem

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

METHODS = ("PGD", "Extragradient", "NAG", "ProjectedReflected", "GoldenRatio",
           "AdaptiveGoldenRatio")


@dataclass
class BaselineConfig:
    """Method selection with stepsize parameters inside the stability ranges.

    Omitted parameters get safe defaults: PGD alpha = mu/L^2, extragradient
    alpha = 0.5/L, projected reflected alpha = 0.4 (sqrt(2)-1)/L, golden ratio
    zeta = (sqrt(5)-1)/2 and alpha = 0.4/(zeta L).
    """

    method: str
    alpha: Optional[float] = None
    zeta: Optional[float] = None

    def resolved(self, mu: float, L: float) -> "BaselineConfig":
        if self.method not in METHODS:
            raise ValueError(f"unknown baseline method: {self.method}")
        alpha, zeta = self.alpha, self.zeta
        if self.method == "PGD":
            alpha = alpha if alpha is not None else mu / L**2
            if not 0 < alpha < 2 * mu / L**2:
                raise ValueError("PGD stepsize must lie in (0, 2 mu/L^2)")
        elif self.method == "Extragradient":
            alpha = alpha if alpha is not None else 0.5 / L
            if not 0 < alpha < 1 / L:
                raise ValueError("extragradient stepsize must lie in (0, 1/L)")
        elif self.method == "ProjectedReflected":
            alpha = alpha if alpha is not None else 0.4 * (math.sqrt(2) - 1) / L
            if not 0 < alpha < (math.sqrt(2) - 1) / L:
                raise ValueError("projected reflected stepsize must lie in (0, (sqrt(2)-1)/L)")
        elif self.method in ("GoldenRatio", "AdaptiveGoldenRatio"):
            zeta = zeta if zeta is not None else GOLDEN
            if not 0 < zeta <= GOLDEN:
                raise ValueError("golden-ratio zeta must lie in (0, (sqrt(5)-1)/2]")
            alpha = alpha if alpha is not None else 0.4 / (zeta * L)
            if not 0 < alpha < 1 / (2 * zeta * L):
                raise ValueError("golden-ratio stepsize must lie in (0, 1/(2 zeta L))")
        return BaselineConfig(self.method, alpha, zeta)


def pgd_step(problem: VIProblem, x, alpha: float, counters: Optional[OracleCounters] = None):
    """x' = proj(x - alpha g(x)); one projection, one operator evaluation."""
    gx = problem.g(x)
    x_new = problem.feasible_set.project(x - alpha * gx)
    if counters is not None:
        counters.g_evals += 1
        counters.proj += 1
    return x_new


def extragradient_step(problem: VIProblem, x, alpha: float,
                       counters: Optional[OracleCounters] = None):
    """Half step to y = proj(x - alpha g(x)), then x' = proj(x - alpha g(y))."""
    V = problem.feasible_set
    y = V.project(x - alpha * problem.g(x))
    x_new = V.project(x - alpha * problem.g(y))
    if counters is not None:
        counters.g_evals += 2
        counters.proj += 2
    return x_new


def projected_reflected_step(problem: VIProblem, x, x_prev, alpha: float,
                             counters: Optional[OracleCounters] = None):
    """x' = proj(x - alpha g(2x - x_prev)); one projection, one evaluation."""
    x_new = problem.feasible_set.project(x - alpha * problem.g(2.0 * x - x_prev))
    if counters is not None:
        counters.g_evals += 1
        counters.proj += 1
    return x_new


def golden_ratio_step(problem: VIProblem, x, y_prev, zeta: float, alpha: float,
                      counters: Optional[OracleCounters] = None, g_x=None):
    """y' = (1-zeta) x + zeta y_prev; x' = proj(y' - alpha g(x)).

    Pass g_x to reuse an operator value already computed by the caller (the
    adaptive variant needs g(x) for its stepsize too).
    """
    if g_x is None:
        g_x = problem.g(x)
        if counters is not None:
            counters.g_evals += 1
    y_new = (1.0 - zeta) * x + zeta * y_prev
    x_new = problem.feasible_set.project(y_new - alpha * g_x)
    if counters is not None:
        counters.proj += 1
    return x_new, y_new


@dataclass
class BaselineRecord:
    iter: int
    residual: float
    cum_lmo: int
    cum_proj: int
    cum_diag_proj: int
    cum_g_evals: int
    wall_ns: int
    x: Optional[np.ndarray] = None


@dataclass
class BaselineResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    records: list
    counters: OracleCounters


def natural_residual(problem: VIProblem, x, g_x=None,
                     counters: Optional[OracleCounters] = None) -> float:
    """||x - proj(x - g(x)/L)||; zero exactly at the solution. Diagnostic only."""
    if g_x is None:
        g_x = problem.g(x)
    p = problem.feasible_set.project(x - g_x / problem.L)
    if counters is not None:
        counters.diag_proj += 1
    return float(np.linalg.norm(x - p))


def solve_baseline(
    problem: VIProblem,
    config: BaselineConfig,
    x0=None,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    counters: Optional[OracleCounters] = None,
    keep_iterates: bool = False,
    record_wall_time: bool = True,
) -> BaselineResult:
    """Iterate the selected projected method until the natural residual
    reaches tol or the iteration budget runs out.

    Residual probes reuse the step's operator value where the method already
    computes g at the current point; projections they need are tracked in the
    diagnostic counter only.
    """
    cfg = config.resolved(problem.mu, problem.L)
    counters = counters if counters is not None else OracleCounters()
    V = problem.feasible_set
    x = np.asarray(x0, dtype=float).copy() if x0 is not None else V.center()
    if not V.contains(x):
        raise ValueError("x0 is not feasible")

    records: list = []
    t0 = time.perf_counter_ns()

    def record(it, res):
        records.append(BaselineRecord(
            it, res, counters.lmo, counters.proj, counters.diag_proj,
            counters.g_evals, time.perf_counter_ns() - t0 if record_wall_time else 0,
            x.copy() if keep_iterates else None))

    res = natural_residual(problem, x, counters=counters)
    record(0, res)
    if res <= tol:
        return BaselineResult(x, True, 0, res, records, counters)

    method = cfg.method
    # method-specific state
    x_prev = x.copy()
    y_prev = x.copy()
    gr_alpha_hist = [cfg.alpha, cfg.alpha]
    gr_x_prev = None
    gr_gx_prev = None
    nag = None
    if method == "NAG":
        g_y = problem.g(x)
        counters.g_evals += 1
        nag = {"A": 1.0, "c": problem.mu * x - g_y}

    for k in range(1, max_iter + 1):
        if method == "PGD":
            x = pgd_step(problem, x, cfg.alpha, counters)
            res = natural_residual(problem, x, counters=counters)
        elif method == "Extragradient":
            x = extragradient_step(problem, x, cfg.alpha, counters)
            res = natural_residual(problem, x, counters=counters)
        elif method == "ProjectedReflected":
            x_new = projected_reflected_step(problem, x, x_prev, cfg.alpha, counters)
            x_prev, x = x, x_new
            res = natural_residual(problem, x, counters=counters)
        elif method == "NAG":
            mu, L = problem.mu, problem.L
            x_k = V.project(nag["c"] / (mu * nag["A"]))
            counters.proj += 1
            g_xk = problem.g(x_k)
            counters.g_evals += 1
            y_next = V.project(x_k - g_xk / L)
            counters.proj += 1
            alpha_next = (mu / L) * nag["A"]
            g_ynext = problem.g(y_next)
            counters.g_evals += 1
            nag["c"] = nag["c"] + alpha_next * (mu * y_next - g_ynext)
            nag["A"] += alpha_next
            x = x_k
            res = float(np.linalg.norm(x_k - y_next))  # natural residual, free here
        elif method in ("GoldenRatio", "AdaptiveGoldenRatio"):
            gx = problem.g(x)
            counters.g_evals += 1
            alpha = cfg.alpha
            if method == "AdaptiveGoldenRatio" and gr_x_prev is not None:
                dg2 = float(np.sum((gx - gr_gx_prev) ** 2))
                dx2 = float(np.sum((x - gr_x_prev) ** 2))
                first = (cfg.zeta + cfg.zeta**2) * gr_alpha_hist[-1]
                if dg2 == 0.0:
                    alpha = first  # zero operator change: second term is +inf
                else:
                    second = dx2 / (4.0 * cfg.zeta**2 * gr_alpha_hist[-2] * dg2)
                    alpha = min(first, second)
                gr_alpha_hist = [gr_alpha_hist[-1], alpha]
            gr_x_prev, gr_gx_prev = x.copy(), gx
            x_new, y_prev = golden_ratio_step(problem, x, y_prev, cfg.zeta, alpha,
                                              counters, g_x=gx)
            x = x_new
            res = natural_residual(problem, x, g_x=None, counters=counters)
        else:  # pragma: no cover
            raise ValueError(method)

        record(k, res)
        if res <= tol:
            return BaselineResult(x, True, k, res, records, counters)

    return BaselineResult(x, False, max_iter, res, records, counters)
