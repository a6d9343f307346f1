"""Accelerated projection-free solver for strongly monotone variational
inequalities.

The outer loop maintains weighted averages of operator evaluations and, at
every iteration, solves two strongly convex-concave saddle subproblems whose
gradients are available in closed form. Subproblems are solved either by the
projection-free Frank-Wolfe inner loop (default) or by their closed-form
single-projection solutions (diagnostic path, used as a correctness oracle
and by benchmarking baselines).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .counting import OracleCounters
from .saddle import (
    Adaptive,
    Harmonic,
    InnerInfo,
    SaddleProblem,
    SaddleResult,
    project_with_lmo,
    solve_saddle,
)

NEGATIVITY_THRESHOLD = -1e-12
INNER_EPS_REL_FLOOR = 5e-14
POLISH_EPS_FLOOR = 1e-13


@dataclass(frozen=True)
class VIProblem:
    """Operator g with its feasible set and regularity constants."""

    g: Callable[[np.ndarray], np.ndarray]
    feasible_set: object
    mu: float
    L: float

    def __post_init__(self):
        if self.mu <= 0 or self.L <= 0:
            raise ValueError("mu and L must be positive")
        if self.L < self.mu:
            raise ValueError("L >= mu required (condition number at least 1)")

    @property
    def gamma(self) -> float:
        return self.L / self.mu


@dataclass
class OuterState:
    """Running aggregates of the outer loop.

    The weighted sums grow like S, so certificate evaluation always works
    with the S-normalized versions to avoid cancellation at large iteration
    counts. The per-step history (lambda_i, y_i, g(y_i)) is kept so the
    aggregate model can be evaluated term by term in centered form; the
    expanded accumulator form loses roughly seven digits to cancellation
    once the iterates cluster around the solution.
    """

    mu: float
    k: int
    S: float
    lambda_next: float
    x_k: np.ndarray
    y_k: np.ndarray
    y_weighted: np.ndarray   # sum of lambda_i * y_i
    g_weighted: np.ndarray   # sum of lambda_i * g(y_i)
    history: list            # list of (lambda_i, y_i, g(y_i))

    @property
    def c(self) -> np.ndarray:
        """Running sum of lambda_i (mu y_i - g(y_i))."""
        return self.mu * self.y_weighted - self.g_weighted

    @property
    def y_avg(self) -> np.ndarray:
        return self.y_weighted / self.S

    def absorb(self, lam: float, y: np.ndarray, g_y: np.ndarray) -> None:
        self.y_weighted = self.y_weighted + lam * y
        self.g_weighted = self.g_weighted + lam * g_y
        self.history.append((lam, y.copy(), g_y.copy()))
        self.S += lam
        self.k += 1


def initial_state(problem: VIProblem, y0: np.ndarray, g_y0: np.ndarray,
                  weight_factor: float = 1.0) -> OuterState:
    """Start the outer loop at y0 with lambda_0 = 1.

    weight_factor scales the weight schedule lambda_{k+1} =
    weight_factor * S_k / gamma. The default 1.0 gives the geometric growth
    S_k = (1 + 1/gamma)^k behind the convergence rate; 0.5 gives the more
    conservative schedule under which the un-normalized gap bound Delta_k is
    provably non-increasing.
    """
    y0 = np.asarray(y0, dtype=float)
    return OuterState(
        mu=problem.mu,
        k=0,
        S=1.0,
        lambda_next=weight_factor / problem.gamma,
        x_k=y0.copy(),
        y_k=y0.copy(),
        y_weighted=y0.copy(),
        g_weighted=np.asarray(g_y0, dtype=float).copy(),
        history=[(1.0, y0.copy(), np.asarray(g_y0, dtype=float).copy())],
    )


def build_x_subproblem(state: OuterState, mu: float, feasible_set) -> SaddleProblem:
    """Saddle subproblem locating the aggregate-model minimizer.

    F(u, x) = <-mu S u + c, x - u> - (mu S / 4) ||x - u||^2, minimized in u
    and maximized in x over the same set. Its solution is the projection of
    c/(mu S), which the inner loop approaches without ever projecting.
    """
    if state.S <= 0:
        raise ValueError("state.S must be positive")
    muS = mu * state.S
    c = state.c

    def grad_u(u, x):
        return muS * u - c - 0.5 * muS * (x - u)

    def grad_x(u, x):
        return (-muS * u + c) - 0.5 * muS * (x - u)

    def value(u, x):
        d = x - u
        return float((-muS * u + c) @ d - 0.25 * muS * (d @ d))

    return SaddleProblem(
        grad_x=grad_u,
        grad_y=grad_x,
        set_x=feasible_set,
        set_y=feasible_set,
        mu_x=1.5 * muS,
        mu_y=0.5 * muS,
        L0=0.5 * muS,
        L_xy=0.5 * muS,
        L_yx=0.5 * muS,
        value=value,
    )


def build_y_subproblem(
    x_k: np.ndarray, g_xk: np.ndarray, mu: float, beta: float, feasible_set
) -> SaddleProblem:
    """Saddle subproblem of the operator step from x_k.

    F(v, x) = <-g(x_k) - beta (v - x_k), x - v> - (mu/4) ||x - v||^2; the
    solution is the projection of x_k - g(x_k)/beta.
    """
    if not beta >= mu > 0:
        raise ValueError("requires beta >= mu > 0")
    x_k = np.asarray(x_k, dtype=float)
    g_xk = np.asarray(g_xk, dtype=float)

    def grad_v(v, x):
        return g_xk + beta * (v - x_k) - (beta - 0.5 * mu) * (x - v)

    def grad_x(v, x):
        return -g_xk - beta * (v - x_k) - 0.5 * mu * (x - v)

    def value(v, x):
        d = x - v
        return float((-g_xk - beta * (v - x_k)) @ d - 0.25 * mu * (d @ d))

    return SaddleProblem(
        grad_x=grad_v,
        grad_y=grad_x,
        set_x=feasible_set,
        set_y=feasible_set,
        mu_x=2.0 * beta - 0.5 * mu,
        mu_y=0.5 * mu,
        L0=beta - 0.5 * mu,
        L_xy=beta - 0.5 * mu,
        L_yx=beta - 0.5 * mu,
        value=value,
    )


def build_y_subproblem_anchored(
    x_k: np.ndarray, g_xk: np.ndarray, beta: float, feasible_set
) -> SaddleProblem:
    """Equal-solution reformulation of the y-subproblem with balanced curvature.

    F(v, x) = <-beta v + c, x - v> - (beta/4) ||x - v||^2 with
    c = beta x_k - g(x_k). The saddle point is the same projection of
    x_k - g(x_k)/beta, but every curvature constant is O(beta), so the
    adaptive inner stepsize is far better conditioned than on the direct
    form when beta >> mu.
    """
    if beta <= 0:
        raise ValueError("requires beta > 0")
    x_k = np.asarray(x_k, dtype=float)
    c = beta * x_k - np.asarray(g_xk, dtype=float)

    def grad_v(v, x):
        return beta * v - c - 0.5 * beta * (x - v)

    def grad_x(v, x):
        return (-beta * v + c) - 0.5 * beta * (x - v)

    def value(v, x):
        d = x - v
        return float((-beta * v + c) @ d - 0.25 * beta * (d @ d))

    return SaddleProblem(
        grad_x=grad_v,
        grad_y=grad_x,
        set_x=feasible_set,
        set_y=feasible_set,
        mu_x=1.5 * beta,
        mu_y=0.5 * beta,
        L0=0.5 * beta,
        L_xy=0.5 * beta,
        L_yx=0.5 * beta,
        value=value,
    )


def closed_form_x(state: OuterState, mu: float, feasible_set) -> np.ndarray:
    """Single-projection solution of the x-subproblem (diagnostic path)."""
    return feasible_set.project(state.c / (mu * state.S))


def closed_form_y(x_k, g_xk, beta: float, feasible_set) -> np.ndarray:
    """Single-projection solution of the y-subproblem (diagnostic path)."""
    return feasible_set.project(np.asarray(x_k) - np.asarray(g_xk) / beta)


@dataclass(frozen=True)
class GapCertificate:
    delta_over_S: float
    method: str  # "projection" or "fw_bound"


def _model_value_normalized(state: OuterState, x: np.ndarray) -> float:
    """Psi_k(x)/S_k evaluated term by term in centered form.

    Each term forms the difference y_i - x before any inner product, and the
    exactly rounded sum keeps the result monotone in k at the 1e-9 relative
    level even after the certificate reaches its floating-point floor.
    """
    terms = [
        lam * (float(g_y @ (y - x)) - 0.5 * state.mu * float((x - y) @ (x - y)))
        for lam, y, g_y in state.history
    ]
    return math.fsum(terms) / state.S


def gap_upper_bound(
    state: OuterState,
    problem: VIProblem,
    mode: str = "projection",
    counters: Optional[OracleCounters] = None,
    fw_iters: int = 2000,
) -> GapCertificate:
    """Upper bound on the optimality gap of the weighted-average iterate.

    "projection" evaluates the aggregate model at the projection of its
    unconstrained maximizer (exact, one diagnostic projection). "fw_bound"
    maximizes the model with plain Frank-Wolfe and adds the final FW gap.
    Diagnostic work is never charged to the algorithmic counters.
    """
    V = problem.feasible_set
    mu = state.mu
    anchor = state.c / (mu * state.S)  # unconstrained maximizer of the model
    if mode == "projection":
        x_dag = V.project(anchor)
        if counters is not None:
            counters.diag_proj += 1
        return GapCertificate(_model_value_normalized(state, x_dag), "projection")
    if mode == "fw_bound":
        x = V.center()
        gap = math.inf
        for k in range(fw_iters):
            grad = -(state.g_weighted / state.S) - mu * (x - state.y_weighted / state.S)
            s_vert = V.lmo(-grad)  # maximize: move toward the gradient
            gap = float(grad @ (s_vert - x))
            if gap <= 0:
                gap = max(gap, 0.0)
                break
            step = min(1.0, gap / (mu * max(float((s_vert - x) @ (s_vert - x)), 1e-300)))
            x = x + step * (s_vert - x)
        return GapCertificate(_model_value_normalized(state, x) + max(gap, 0.0), "fw_bound")
    raise ValueError(f"unknown certificate mode: {mode}")


def early_stop_rule(info: InnerInfo, threshold: float = NEGATIVITY_THRESHOLD) -> bool:
    """Stop the inner solve once the subproblem value is certified negative.

    F(x_cur, y_cur) plus the max-side FW gap upper-bounds the min-max value;
    strict negativity of that bound suffices for the outer-loop recursion, so
    further inner work is wasted.
    """
    if info.problem.value is None:
        return False
    x, y = info.problem.split(info.z)
    return info.problem.value(x, y) + info.gap_y < threshold


def certified_value_bound(z: np.ndarray, problem: SaddleProblem) -> float:
    """Certified bound on max over the concave variable at the point z.

    By concavity, value + max-side FW gap upper-bounds the max of F(x, .).
    The LMO call is diagnostic and never charged to algorithmic counters.
    """
    if problem.value is None:
        return math.nan
    x, y = problem.split(z)
    gy = problem.grad_y(x, y)
    s_y = problem.set_y.lmo(-gy)
    return problem.value(x, y) + float(gy @ (s_y - y))


def certified_upper_bound(result: SaddleResult, problem: SaddleProblem) -> float:
    """Certified bound on max over the concave variable at the returned point."""
    return certified_value_bound(result.z, problem)


def default_inner_epsilon(epsilon: float, k: int) -> float:
    """Summable inner-tolerance schedule keeping the certificate recursion tight."""
    return epsilon / (10.0 * (k + 1) ** 2)


@dataclass
class VipOptions:
    inner_rule: str = "adaptive"        # "adaptive" | "harmonic"
    nu: float = 0.9                     # base gain of the adaptive inner rule
    max_inner: int = 200_000
    use_projections: bool = False       # closed-form diagnostic path
    early_stop: bool = True
    record_trace: bool = True
    border_hint: Optional[float] = None  # saddle-to-boundary distance, enables rate-based gain
    x0: Optional[np.ndarray] = None
    count_diagnostics: bool = False
    record_iterates: bool = False       # keep per-outer-iteration iterates in the trace
    weight_factor: float = 1.0          # lambda_{k+1} = weight_factor * S_k / gamma
    anchored_y: bool = True             # balanced reformulation of the y-subproblem
    gain_ladder: bool = True            # escalate the adaptive gain on inner stalls
    ladder_chunk: int = 300             # inner iterations per gain trial
    ladder_factor: float = 3.0          # multiplicative gain spacing between rungs
    ladder_rungs: int = 5               # number of gains nu * factor^r available
    polish: bool = True                 # LMO-projection refinement after the saddle phase
    saddle_phase: int = 300             # saddle-loop budget per subproblem when polishing


class _GainLadder:
    """Adaptive-gain scheduler for one recurring family of inner subproblems.

    The right gain for the gap-proportional stepsize depends on how far the
    saddle point sits from the feasible-set boundary, which varies by problem
    but is stable across the outer iterations. The ladder solves in chunks,
    escalates the gain when a chunk stalls, backs off when one diverges, and
    remembers the last gain that worked so subsequent solves start there.
    """

    def __init__(self, options: VipOptions):
        self.rung = 0
        self.nu0 = options.nu
        self.factor = options.ladder_factor
        self.rungs = options.ladder_rungs
        self.chunk = options.ladder_chunk

    def solve(
        self,
        sub: SaddleProblem,
        epsilon: float,
        z0: np.ndarray,
        max_total: int,
        counters: Optional[OracleCounters],
        early_stop: bool,
    ):
        """Return (z, iterations) with fw_gap certified <= epsilon or budget spent."""
        d = sub.set_x.diameter()
        C = sub.L0 * d * d
        best_z = np.asarray(z0, dtype=float)
        best_gap = math.inf
        total = 0
        r = self.rung
        stalls = 0
        while total < max_total:
            diverged = [False]
            start_gap = [math.inf]

            def stop(info, _d=diverged, _s=start_gap):
                if early_stop and early_stop_rule(info):
                    return True
                if not math.isfinite(_s[0]):
                    _s[0] = info.fw_gap
                elif info.fw_gap > 5.0 * _s[0] + 1e-12 * C:
                    _d[0] = True
                    return True
                return False

            res = solve_saddle(
                sub, Adaptive(self.nu0 * self.factor**r, C), epsilon,
                min(self.chunk, max_total - total), best_z,
                stop_callback=stop, counters=counters,
            )
            total += res.iterations
            if res.converged or (res.stopped_early and not diverged[0]):
                self.rung = r
                return res.z, total
            ratio = res.fw_gap / best_gap if math.isfinite(best_gap) else 0.0
            if res.fw_gap < best_gap:
                best_gap, best_z = res.fw_gap, res.z
            if diverged[0]:
                r = max(r - 1, 0)
                stalls += 1
            else:
                if ratio > 0.1:
                    # progress too slow at this gain; try the next rung
                    r = (r + 1) % self.rungs
                stalls = 0 if ratio <= 0.5 else stalls + 1
            # give up only when no rung has made real progress for a while
            if stalls > 3 * self.rungs:
                break
        # remember the escalation point even on budget exhaustion, so the
        # next solve of this family resumes the search instead of restarting
        self.rung = r
        return best_z, total


@dataclass
class OuterTraceEntry:
    k: int
    certificate: float
    cum_lmo: int
    cum_proj: int
    cum_diag_proj: int
    cum_g_evals: int
    inner_iters: int
    slack: float          # certified inner slack added to the model recursion this step
    cum_slack: float
    S: float
    lam: float
    wall_ns: int
    y_avg: Optional[np.ndarray] = None
    x_model: Optional[np.ndarray] = None


@dataclass
class VipResult:
    y_tilde: np.ndarray
    converged: bool
    iterations: int
    certificate: float
    trace: list
    counters: OracleCounters
    state: OuterState

    @property
    def x_model(self) -> np.ndarray:
        """Minimizer of the final aggregate model; the recommended solution.

        The certificate bounds mu/2 times its squared distance to the exact
        model minimizer's target, so it converges at least as fast as the
        weighted average y_tilde and is much more accurate on problems whose
        solutions sit on low-dimensional faces.
        """
        return self.state.x_k


def _inner_rule(options: VipOptions, sub: SaddleProblem, feasible_set):
    if options.inner_rule == "harmonic":
        return Harmonic()
    d = feasible_set.diameter()
    C = sub.L0 * d * d  # L0 (D^2 + D^2) / 2 with both sets equal
    if options.border_hint is not None:
        from .saddle import rate_constants

        rc = rate_constants(d, d, sub.L0, sub.L_xy, sub.L_yx, sub.mu_x, sub.mu_y,
                            options.border_hint, options.border_hint)
        if rc.adaptive_ok:
            return Adaptive(nu=rc.nu, C=rc.C)
        return Harmonic()
    return Adaptive(nu=options.nu, C=C)


def solve_subproblem(
    sub: SaddleProblem,
    theta: float,
    anchor: np.ndarray,
    feasible_set,
    epsilon: float,
    z0: np.ndarray,
    options: VipOptions,
    counters: Optional[OracleCounters] = None,
    ladder: Optional[_GainLadder] = None,
) -> tuple:
    """Projection-free solve of one outer-loop subproblem; returns (u, iterations).

    Phase one runs the saddle Frank-Wolfe loop (the certified early stop lives
    here). Phase two exploits that the subproblem's minimizer is the projection
    of `anchor` for curvature `theta`, refining the iterate by away-step
    Frank-Wolfe on 0.5 ||u - anchor||^2, which converges linearly using only
    LMO calls.
    """
    budget = options.max_inner
    saddle_budget = min(budget, options.saddle_phase) if options.polish else budget
    if ladder is not None:
        z, it = ladder.solve(sub, epsilon, z0, saddle_budget, counters,
                             options.early_stop)
    else:
        res = solve_saddle(sub, _inner_rule(options, sub, feasible_set), epsilon,
                           saddle_budget, z0,
                           stop_callback=early_stop_rule if options.early_stop else None,
                           counters=counters)
        z, it = res.z, res.iterations
    u = sub.split(z)[0]
    if options.polish:
        anchor = np.asarray(anchor, dtype=float)
        eps_p = max(POLISH_EPS_FLOOR * (1.0 + float(anchor @ anchor)),
                    0.25 * epsilon / theta)
        pr = project_with_lmo(feasible_set, anchor, eps_p, max(budget - it, 1),
                              start=u, counters=counters)
        u = pr.point
        it += pr.iterations
    return u, it


def solve_vip(
    problem: VIProblem,
    epsilon: float,
    inner_epsilon: Optional[Callable[[int], float]] = None,
    max_outer: int = 1000,
    options: Optional[VipOptions] = None,
) -> VipResult:
    """Run the accelerated outer loop until the gap certificate reaches epsilon.

    Weights follow lambda_0 = 1, lambda_{k+1} = S_k/gamma by default, so
    S_k = (1 + 1/gamma)^k and the certificate contracts geometrically. The
    returned iterate is the weighted average of the y-sequence and is always
    feasible.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    options = options or VipOptions()
    inner_eps_of = inner_epsilon or (lambda k: default_inner_epsilon(epsilon, k))
    V = problem.feasible_set
    g = problem.g
    mu, L, gamma = problem.mu, problem.L, problem.gamma
    d2 = V.diameter() ** 2
    counters = OracleCounters()

    y0 = np.asarray(options.x0, dtype=float) if options.x0 is not None else V.center()
    if not V.contains(y0):
        raise ValueError("initial point is not feasible")
    g_y0 = g(y0)
    counters.g_evals += 1
    state = initial_state(problem, y0, g_y0, options.weight_factor)

    use_ladder = (
        not options.use_projections
        and options.inner_rule == "adaptive"
        and options.border_hint is None
        and options.gain_ladder
    )
    ladder_x = _GainLadder(options) if use_ladder else None
    ladder_y = _GainLadder(options) if use_ladder else None
    y_prev = y0.copy()

    trace: list = []
    cum_slack = 0.0
    cert = gap_upper_bound(state, problem, "projection",
                           counters if options.count_diagnostics else None).delta_over_S
    if options.record_trace:
        trace.append(OuterTraceEntry(0, cert, counters.lmo, counters.proj,
                                     counters.diag_proj, counters.g_evals, 0, 0.0,
                                     0.0, state.S, state.lambda_next, 0,
                                     state.y_avg.copy() if options.record_iterates else None,
                                     state.x_k.copy() if options.record_iterates else None))
    converged = cert <= epsilon
    k = 0
    t0 = time.perf_counter_ns()
    while not converged and k < max_outer:
        eps_k = inner_eps_of(k)
        inner_iters = 0

        # x-subproblem: scale-aware tolerance floor keeps late, huge-S solves
        # from chasing sub-float-precision gaps
        if options.use_projections:
            x_k = closed_form_x(state, mu, V)
            counters.proj += 1
            slack_x = 0.0
        else:
            sub_x = build_x_subproblem(state, mu, V)
            eps_x = max(eps_k, INNER_EPS_REL_FLOOR * mu * state.S * d2)
            z0 = np.concatenate([state.x_k, state.x_k])
            x_k, it_x = solve_subproblem(sub_x, mu * state.S, state.c / (mu * state.S),
                                         V, eps_x, z0, options, counters, ladder_x)
            inner_iters += it_x
            slack_x = max(certified_value_bound(np.concatenate([x_k, x_k]), sub_x), 0.0)

        g_xk = g(x_k)
        counters.g_evals += 1

        if options.use_projections:
            y_next = closed_form_y(x_k, g_xk, L, V)
            counters.proj += 1
            slack_y = 0.0
        else:
            sub_y_direct = build_y_subproblem(x_k, g_xk, mu, L, V)
            sub_y = (build_y_subproblem_anchored(x_k, g_xk, L, V)
                     if options.anchored_y else sub_y_direct)
            eps_y = max(eps_k, INNER_EPS_REL_FLOOR * L * d2)
            z0 = np.concatenate([y_prev, y_prev])
            y_next, it_y = solve_subproblem(sub_y, L, x_k - g_xk / L,
                                            V, eps_y, z0, options, counters, ladder_y)
            inner_iters += it_y
            # the slack entering the model recursion is always measured on
            # the direct form, whatever form the inner loop solved
            slack_y = max(certified_value_bound(
                np.concatenate([y_next, y_next]), sub_y_direct), 0.0)

        lam = state.lambda_next
        g_ynext = g(y_next)
        counters.g_evals += 1
        state.x_k = x_k
        state.y_k = y_next
        y_prev = y_next
        state.absorb(lam, y_next, g_ynext)
        state.lambda_next = options.weight_factor * state.S / gamma

        step_slack = slack_x + lam * slack_y
        cum_slack += step_slack
        cert = gap_upper_bound(state, problem, "projection",
                               counters if options.count_diagnostics else None).delta_over_S
        k += 1
        if options.record_trace:
            trace.append(OuterTraceEntry(
                k, cert, counters.lmo, counters.proj, counters.diag_proj,
                counters.g_evals, inner_iters, step_slack, cum_slack,
                state.S, state.lambda_next, time.perf_counter_ns() - t0,
                state.y_avg.copy() if options.record_iterates else None,
                state.x_k.copy() if options.record_iterates else None))
        converged = cert <= epsilon

    return VipResult(
        y_tilde=state.y_avg,
        converged=converged,
        iterations=k,
        certificate=cert,
        trace=trace,
        counters=counters,
        state=state,
    )
