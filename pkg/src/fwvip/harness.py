"""Experiment harness: YAML configs in, deterministic CSV traces out.

A config names a problem (synthetic affine or traffic assignment), a list of
solvers, budgets, and a target accuracy. Running it produces one row per
recorded iteration with cumulative oracle counts and convergence metrics.
CSV output is byte-identical across reruns of the same config unless wall
times are explicitly enabled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from . import baselines, tap
from .counting import OracleCounters
from .operators import ConstantsEstimate, estimate_constants, make_affine_instance
from .vip import VIProblem, VipOptions, solve_vip

CSV_COLUMNS = ("solver", "iter", "cum_lmo", "cum_proj", "cum_diag_proj",
               "cum_g_evals", "gap", "wardrop", "dist_to_oracle", "wall_ns")

FW_SOLVER = "FW-VIP"
KNOWN_SOLVERS = (FW_SOLVER,) + baselines.METHODS

DEFAULT_ESTIMATE_SAMPLES = 2000
REFERENCE_TOL = 1e-10


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configs."""


@dataclass
class ProblemConfig:
    kind: str                       # "affine" | "tap"
    dim: int = 20
    mu: float = 1.0
    skew_scale: float = 5.0
    seed: int = 0
    demands: Optional[Dict[Tuple[int, int], float]] = None
    kappa: float = tap.DEFAULT_KAPPA
    n_samples: int = DEFAULT_ESTIMATE_SAMPLES


@dataclass
class SolverSpec:
    name: str
    parameters: dict = field(default_factory=dict)


@dataclass
class Budgets:
    max_outer: int = 1000
    max_inner: int = 200_000
    max_oracle_calls: int = 2_000_000


@dataclass
class ExperimentConfig:
    problem: ProblemConfig
    solvers: List[SolverSpec]
    epsilon: float = 1e-6
    seed: int = 0
    budgets: Budgets = field(default_factory=Budgets)
    output_path: Optional[str] = None
    reference: str = "none"         # "none" | "extragradient" (enables dist_to_oracle)
    record_wall_time: bool = False
    count_diagnostics: bool = False


def _parse_demands(raw) -> Dict[Tuple[int, int], float]:
    out = {}
    for key, val in raw.items():
        try:
            o, d = (int(t) for t in str(key).replace("-", ",").split(","))
        except ValueError as exc:
            raise ConfigError(f"bad OD key {key!r}; expected 'origin,dest'") from exc
        out[(o, d)] = float(val)
    return out


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        praw = dict(data["problem"])
        kind = praw.pop("kind")
        if kind not in ("affine", "tap"):
            raise ConfigError(f"unknown problem kind: {kind!r}")
        if "demands" in praw and praw["demands"] is not None:
            praw["demands"] = _parse_demands(praw["demands"])
        problem = ProblemConfig(kind=kind, **praw)

        solvers = []
        for s in data["solvers"]:
            if isinstance(s, str):
                s = {"name": s}
            name = s["name"]
            if name not in KNOWN_SOLVERS:
                raise ConfigError(f"unknown solver: {name!r}")
            solvers.append(SolverSpec(name=name, parameters=dict(s.get("parameters") or {})))
        if not solvers:
            raise ConfigError("at least one solver is required")

        budgets = Budgets(**(data.get("budgets") or {}))
        cfg = ExperimentConfig(
            problem=problem,
            solvers=solvers,
            epsilon=float(data.get("epsilon", 1e-6)),
            seed=int(data.get("seed", 0)),
            budgets=budgets,
            output_path=data.get("output_path"),
            reference=data.get("reference", "none"),
            record_wall_time=bool(data.get("record_wall_time", False)),
            count_diagnostics=bool(data.get("count_diagnostics", False)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    if cfg.epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    if cfg.reference not in ("none", "extragradient"):
        raise ConfigError(f"unknown reference mode: {cfg.reference!r}")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(data)


@dataclass
class BuiltProblem:
    vi: VIProblem
    instance: Optional[tap.TAPInstance]   # set for tap problems
    constants: Optional[ConstantsEstimate]  # set when mu/L were estimated


def build_problem(cfg: ProblemConfig) -> BuiltProblem:
    if cfg.kind == "affine":
        op, box = make_affine_instance(cfg.dim, cfg.mu, cfg.skew_scale, cfg.seed)
        return BuiltProblem(
            VIProblem(g=op.as_field(), feasible_set=box, mu=op.mu(), L=op.lipschitz()),
            None, None)
    instance = tap.build_instance(cfg.demands, cfg.kappa)
    fset = tap.feasible_set(instance)

    def g(x):
        return tap.path_operator(instance, x)

    est = estimate_constants(g, fset, cfg.n_samples, cfg.seed)
    if est.nonmonotone_samples:
        raise ConfigError("sampled operator pairs violate monotonicity")
    return BuiltProblem(
        VIProblem(g=g, feasible_set=fset, mu=est.mu_hat, L=max(est.L_hat, est.mu_hat)),
        instance, est)


def compute_reference(problem: VIProblem, tol: float = REFERENCE_TOL,
                      max_iter: int = 2_000_000) -> np.ndarray:
    """High-accuracy solution via extragradient; diagnostic, never counted."""
    res = baselines.solve_baseline(
        problem, baselines.BaselineConfig("Extragradient"),
        tol=tol, max_iter=max_iter, record_wall_time=False)
    if not res.converged:
        raise RuntimeError("reference solve did not reach the requested accuracy")
    return res.x


@dataclass
class RunRecord:
    solver: str
    iter: int
    cum_lmo: int
    cum_proj: int
    cum_diag_proj: int
    cum_g_evals: int
    gap: float
    wardrop: float
    dist_to_oracle: float
    wall_ns: int

    def row(self) -> list:
        return [self.solver, self.iter, self.cum_lmo, self.cum_proj,
                self.cum_diag_proj, self.cum_g_evals, repr(self.gap),
                repr(self.wardrop), repr(self.dist_to_oracle), self.wall_ns]


@dataclass
class SolverSummary:
    solver: str
    converged: bool
    iterations: int
    final_gap: float
    counters: OracleCounters


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: List[RunRecord]
    summaries: List[SolverSummary]
    reference: Optional[np.ndarray]

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.summaries)


def _baseline_iter_budget(name: str, budgets: Budgets) -> int:
    per_step = {"PGD": 2, "Extragradient": 4, "NAG": 4, "ProjectedReflected": 2,
                "GoldenRatio": 2, "AdaptiveGoldenRatio": 2}[name]
    return max(1, budgets.max_oracle_calls // per_step)


def _metrics(x, instance, reference) -> Tuple[float, float]:
    wd = tap.wardrop_residual(instance, x) if instance is not None else math.nan
    dist = float(np.linalg.norm(x - reference)) if reference is not None else math.nan
    return wd, dist


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    built = build_problem(cfg.problem)
    problem, instance = built.vi, built.instance
    reference = compute_reference(problem) if cfg.reference == "extragradient" else None
    need_iterates = instance is not None or reference is not None

    records: List[RunRecord] = []
    summaries: List[SolverSummary] = []
    for spec in cfg.solvers:
        if spec.name == FW_SOLVER:
            p = dict(spec.parameters)
            opts = VipOptions(
                inner_rule=p.pop("inner_rule", "adaptive"),
                nu=float(p.pop("nu", 0.9)),
                max_inner=int(p.pop("max_inner", cfg.budgets.max_inner)),
                early_stop=bool(p.pop("early_stop", True)),
                weight_factor=float(p.pop("weight_factor", 1.0)),
                anchored_y=bool(p.pop("anchored_y", True)),
                gain_ladder=bool(p.pop("gain_ladder", True)),
                count_diagnostics=cfg.count_diagnostics,
                record_iterates=need_iterates,
            )
            max_outer = int(p.pop("max_outer", cfg.budgets.max_outer))
            if p:
                raise ConfigError(f"unknown FW-VIP parameters: {sorted(p)}")
            res = solve_vip(problem, cfg.epsilon, max_outer=max_outer, options=opts)
            for e in res.trace:
                # metrics track the model minimizer, the solver's recommended iterate
                x = e.x_model if e.x_model is not None else e.y_avg
                wd, dist = _metrics(x, instance if x is not None else None,
                                    reference if x is not None else None)
                records.append(RunRecord(
                    spec.name, e.k, e.cum_lmo, e.cum_proj, e.cum_diag_proj,
                    e.cum_g_evals, e.certificate, wd, dist,
                    e.wall_ns if cfg.record_wall_time else 0))
            summaries.append(SolverSummary(spec.name, res.converged, res.iterations,
                                           res.certificate, res.counters))
        else:
            p = dict(spec.parameters)
            bcfg = baselines.BaselineConfig(
                spec.name, alpha=p.pop("alpha", None), zeta=p.pop("zeta", None))
            max_iter = int(p.pop("max_iter", _baseline_iter_budget(spec.name, cfg.budgets)))
            stride = int(p.pop("record_every", 1))
            if p:
                raise ConfigError(f"unknown {spec.name} parameters: {sorted(p)}")
            res = baselines.solve_baseline(
                problem, bcfg, tol=cfg.epsilon, max_iter=max_iter,
                keep_iterates=need_iterates, record_wall_time=cfg.record_wall_time)
            last = len(res.records) - 1
            for i, r in enumerate(res.records):
                if i % stride and i != last:
                    continue
                wd, dist = _metrics(r.x, instance if r.x is not None else None,
                                    reference if r.x is not None else None)
                records.append(RunRecord(
                    spec.name, r.iter, r.cum_lmo, r.cum_proj, r.cum_diag_proj,
                    r.cum_g_evals, r.residual, wd, dist, r.wall_ns))
            summaries.append(SolverSummary(spec.name, res.converged, res.iterations,
                                           res.residual, res.counters))

    result = ExperimentResult(cfg, records, summaries, reference)
    if cfg.output_path:
        write_csv(result, cfg.output_path)
    return result


def write_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in result.records:
            w.writerow(r.row())


def selftest() -> List[str]:
    """Fast internal consistency checks; returns a list of failure messages."""
    failures: List[str] = []

    def check(cond, msg):
        if not cond:
            failures.append(msg)

    # geometry: LMO of a simplex hits the cheapest vertex, projection feasible
    from .geometry import Box, ScaledSimplex
    s = ScaledSimplex(dim=4, mass=2.0)
    v = s.lmo(np.array([3.0, -1.0, 0.5, 2.0]))
    check(np.allclose(v, [0, 2, 0, 0]), "simplex LMO picked a non-minimal vertex")
    check(s.contains(s.project(np.array([5.0, -3.0, 1.0, 0.0]))),
          "simplex projection left the set")
    b = Box(lower=-np.ones(3), upper=np.ones(3))
    check(np.allclose(b.project(np.array([2.0, -2.0, 0.5])), [1, -1, 0.5]),
          "box projection is not a clip")

    # outer loop: weight identity S_k = (1 + 1/gamma)^k and certificate decrease
    op, box = make_affine_instance(6, 1.0, 2.0, seed=3)
    vi = VIProblem(op.as_field(), box, mu=op.mu(), L=op.lipschitz())
    res = solve_vip(vi, 1e-4, max_outer=60)
    growth = (1.0 + 1.0 / vi.gamma) ** res.iterations
    check(abs(res.state.S - growth) <= 1e-9 * growth, "weight sum drifted from its closed form")
    check(res.converged, "synthetic affine run missed its certificate target")
    certs = [e.certificate for e in res.trace]
    check(all(c >= -1e-12 for c in certs), "negative gap certificate")

    # baselines: PGD counter exactness (1 projection + 1 evaluation per step)
    bres = baselines.solve_baseline(vi, baselines.BaselineConfig("PGD"),
                                    tol=1e-3, max_iter=5000, record_wall_time=False)
    check(bres.counters.proj == bres.iterations, "PGD projection count mismatch")
    check(bres.counters.g_evals == bres.iterations, "PGD evaluation count mismatch")

    # traffic instance: incidence shape and flow conservation
    inst = tap.build_instance()
    check(inst.incidence.shape == (40, 10), "unexpected incidence shape")
    fs = tap.feasible_set(inst)
    x = fs.center()
    per_od = np.add.reduceat(x, np.arange(0, 10, 2))
    check(np.allclose(per_od, [od.demand for od in inst.od_pairs]),
          "center flow violates demand conservation")
    check(tap.instances_equal(inst, tap.parse_instance(tap.format_instance(inst))),
          "instance text round-trip changed the instance")
    return failures
