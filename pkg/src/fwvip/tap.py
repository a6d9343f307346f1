"""Circular-highway traffic assignment instance.

Five nodes sit on a ring. At every node and for each ring direction there is
an entrance ramp, an exit ramp, a bypass lane carrying through traffic past
the merge, and a highway segment to the next node: 40 links total. Each of
the five origin-destination pairs splits its demand over exactly two paths
(clockwise and counterclockwise); through traffic at an intermediate node
uses that node's bypass, never its exit ramp.

Link labels follow the two-digit scheme "<node><type>":
  <node>1 entrance cw   <node>3 entrance ccw
  <node>4 exit cw       <node>2 exit ccw
  <node>5 bypass cw     <node>6 bypass ccw
  <node>7 highway cw    <node>8 highway ccw
A highway segment is anchored at its upstream node; its delay is coupled to
the exit ramp at its downstream node (same direction), and an entrance
ramp's delay is coupled to the bypass at its own node (the lane it merges
into).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .geometry import Box, ProductSet, ScaledSimplex

NUM_NODES = 5
OD_PAIRS = ((1, 4), (2, 5), (3, 1), (4, 2), (5, 3))
DEFAULT_DEMANDS = {(1, 4): 0.1, (2, 5): 0.2, (3, 1): 0.3, (4, 2): 0.4, (5, 3): 0.5}
DEFAULT_KAPPA = 0.5
HIGHWAY_SCALE = 10.0

_TYPE_DIGIT = {
    ("entrance", "cw"): 1, ("exit", "ccw"): 2, ("entrance", "ccw"): 3,
    ("exit", "cw"): 4, ("bypass", "cw"): 5, ("bypass", "ccw"): 6,
    ("highway", "cw"): 7, ("highway", "ccw"): 8,
}


def link_id(node: int, kind: str, direction: str) -> str:
    return f"{node}{_TYPE_DIGIT[(kind, direction)]}"


def _next(node: int, direction: str) -> int:
    if direction == "cw":
        return node % NUM_NODES + 1
    return (node - 2) % NUM_NODES + 1


def delay_poly(x):
    """Congestion polynomial h(x) = 1 + x + x^2."""
    x = np.asarray(x, dtype=float)
    return 1.0 + x + x * x


@dataclass(frozen=True)
class Link:
    id: str
    kind: str        # highway | exit | entrance | bypass
    node: int
    direction: str   # cw | ccw
    coupled_exit: Optional[str] = None    # highways: exit ramp at the downstream node
    coupled_bypass: Optional[str] = None  # entrance ramps: bypass merging at this node


@dataclass(frozen=True)
class ODPair:
    origin: int
    dest: int
    demand: float


@dataclass(frozen=True)
class Path:
    origin: int
    dest: int
    direction: str
    links: Tuple[str, ...]


@dataclass(frozen=True)
class TAPInstance:
    kappa: float
    highway_scale: float
    links: Tuple[Link, ...]
    od_pairs: Tuple[ODPair, ...]
    paths: Tuple[Path, ...]
    incidence: np.ndarray  # links x paths, entries in {0, 1}

    @property
    def num_links(self) -> int:
        return len(self.links)

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    def link_row(self, lid: str) -> int:
        return self._row_index[lid]

    def __post_init__(self):
        object.__setattr__(self, "_row_index",
                           {ln.id: i for i, ln in enumerate(self.links)})
        # vectorized delay evaluation needs the coupling rows up front
        kinds = np.array([ln.kind for ln in self.links])
        couple = np.zeros(len(self.links), dtype=int)
        for i, ln in enumerate(self.links):
            if ln.kind == "highway":
                couple[i] = self._row_index[ln.coupled_exit]
            elif ln.kind == "entrance":
                couple[i] = self._row_index[ln.coupled_bypass]
        object.__setattr__(self, "_kinds", kinds)
        object.__setattr__(self, "_couple_rows", couple)


def _path_links(origin: int, dest: int, direction: str) -> Tuple[str, ...]:
    seq = [link_id(origin, "entrance", direction)]
    m = origin
    seq.append(link_id(m, "highway", direction))
    m = _next(m, direction)
    while m != dest:
        seq.append(link_id(m, "bypass", direction))
        seq.append(link_id(m, "highway", direction))
        m = _next(m, direction)
    seq.append(link_id(dest, "exit", direction))
    return tuple(seq)


def build_instance(demands: Optional[Dict[Tuple[int, int], float]] = None,
                   kappa: float = DEFAULT_KAPPA) -> TAPInstance:
    """Construct the canonical 5-node ring instance.

    Only the five origin-destination pairs of the canonical instance are
    accepted; missing ones default to the standard demands.
    """
    demands = dict(DEFAULT_DEMANDS) if demands is None else dict(demands)
    extra = set(demands) - set(OD_PAIRS)
    if extra:
        raise ValueError(f"unsupported OD pairs: {sorted(extra)}")
    for od, d in demands.items():
        if d < 0:
            raise ValueError(f"negative demand for OD {od}")
    full = {od: demands.get(od, DEFAULT_DEMANDS[od]) for od in OD_PAIRS}

    links = []
    for kind in ("highway", "exit", "entrance", "bypass"):
        for direction in ("cw", "ccw"):
            for node in range(1, NUM_NODES + 1):
                cexit = cbypass = None
                if kind == "highway":
                    cexit = link_id(_next(node, direction), "exit", direction)
                elif kind == "entrance":
                    cbypass = link_id(node, "bypass", direction)
                links.append(Link(link_id(node, kind, direction), kind, node,
                                  direction, cexit, cbypass))
    links = tuple(links)

    od_pairs = tuple(ODPair(o, d, full[(o, d)]) for o, d in OD_PAIRS)
    paths = tuple(
        Path(od.origin, od.dest, direction, _path_links(od.origin, od.dest, direction))
        for od in od_pairs for direction in ("cw", "ccw")
    )
    row = {ln.id: i for i, ln in enumerate(links)}
    a = np.zeros((len(links), len(paths)))
    for j, p in enumerate(paths):
        for lid in p.links:
            a[row[lid], j] = 1.0
    return TAPInstance(kappa=kappa, highway_scale=HIGHWAY_SCALE, links=links,
                       od_pairs=od_pairs, paths=paths, incidence=a)


def feasible_set(instance: TAPInstance) -> ProductSet:
    """Product over OD pairs of per-pair path-flow simplices.

    Zero-demand pairs degenerate to the single zero vector (a width-zero box).
    """
    blocks = []
    for od in instance.od_pairs:
        if od.demand > 0:
            blocks.append(ScaledSimplex(dim=2, mass=od.demand))
        else:
            blocks.append(Box(lower=np.zeros(2), upper=np.zeros(2)))
    return ProductSet(tuple(blocks))


def link_flows(instance: TAPInstance, x) -> np.ndarray:
    """Aggregate path flows into link flows through the incidence matrix."""
    return instance.incidence @ np.asarray(x, dtype=float)


def link_delays(instance: TAPInstance, y) -> np.ndarray:
    """Componentwise link delays at link-flow vector y.

    highway: 10 h(flow) + 2 kappa h(flow on its exit ramp);
    entrance: h(flow) + kappa h(flow on the merging bypass);
    exit and bypass: h(flow).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (instance.num_links,):
        raise ValueError(f"expected {instance.num_links} link flows")
    h = delay_poly(y)
    out = h.copy()
    kinds = instance._kinds
    couple = instance._couple_rows
    hw = kinds == "highway"
    out[hw] = instance.highway_scale * h[hw] + 2.0 * instance.kappa * h[couple[hw]]
    en = kinds == "entrance"
    out[en] = h[en] + instance.kappa * h[couple[en]]
    return out


def path_operator(instance: TAPInstance, x) -> np.ndarray:
    """Path travel times T(x) = A^T delays(A x); the operator of the induced VI."""
    a = instance.incidence
    return a.T @ link_delays(instance, a @ np.asarray(x, dtype=float))


def path_times_by_od(instance: TAPInstance, x):
    times = path_operator(instance, x)
    out = {}
    for j, p in enumerate(instance.paths):
        out.setdefault((p.origin, p.dest), []).append(times[j])
    return out


def wardrop_residual(instance: TAPInstance, x, use_tol: float = 1e-8) -> float:
    """Worst excess travel time of a used path over its OD pair's best path.

    Zero (within tolerance) exactly at a user equilibrium. Paths carrying no
    flow (below use_tol scaled by the pair's demand) are ignored.
    """
    x = np.asarray(x, dtype=float)
    times = path_operator(instance, x)
    worst = 0.0
    j = 0
    for od in instance.od_pairs:
        t = times[j:j + 2]
        flows = x[j:j + 2]
        j += 2
        if od.demand <= 0:
            continue
        best = float(np.min(t))
        used = flows > use_tol * od.demand
        if np.any(used):
            worst = max(worst, float(np.max(t[used]) - best))
    return worst


# --- instance serialization (auditable plain-text format) -------------------

FORMAT_HEADER = "tap-instance v1"


def format_instance(instance: TAPInstance) -> str:
    """Human-readable dump: parameters, demands, links with couplings, paths."""
    lines = [FORMAT_HEADER,
             f"kappa {instance.kappa!r}",
             f"highway_scale {instance.highway_scale!r}"]
    for od in instance.od_pairs:
        lines.append(f"od {od.origin} {od.dest} {od.demand!r}")
    for ln in instance.links:
        parts = [f"link {ln.id} {ln.kind} node={ln.node} dir={ln.direction}"]
        if ln.coupled_exit:
            parts.append(f"coupled_exit={ln.coupled_exit}")
        if ln.coupled_bypass:
            parts.append(f"coupled_bypass={ln.coupled_bypass}")
        lines.append(" ".join(parts))
    for p in instance.paths:
        lines.append(f"path {p.origin} {p.dest} {p.direction} " + ",".join(p.links))
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> TAPInstance:
    """Rebuild an instance from its text dump (inverse of format_instance)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError("not a tap-instance file")
    kappa = highway_scale = None
    demands, links, paths = {}, [], []
    for ln in lines[1:]:
        tok = ln.split()
        if tok[0] == "kappa":
            kappa = float(tok[1])
        elif tok[0] == "highway_scale":
            highway_scale = float(tok[1])
        elif tok[0] == "od":
            demands[(int(tok[1]), int(tok[2]))] = float(tok[3])
        elif tok[0] == "link":
            kw = dict(part.split("=") for part in tok[4:])
            attrs = dict(part.split("=") for part in tok[3:])
            links.append(Link(tok[1], tok[2], int(attrs["node"]), attrs["dir"],
                              kw.get("coupled_exit"), kw.get("coupled_bypass")))
        elif tok[0] == "path":
            paths.append(Path(int(tok[1]), int(tok[2]), tok[3],
                              tuple(tok[4].split(","))))
        else:
            raise ValueError(f"unrecognized line: {ln}")
    if kappa is None or highway_scale is None:
        raise ValueError("missing kappa/highway_scale")
    od_pairs = tuple(ODPair(o, d, demands[(o, d)]) for (o, d) in demands)
    row = {ln.id: i for i, ln in enumerate(links)}
    a = np.zeros((len(links), len(paths)))
    for j, p in enumerate(paths):
        for lid in p.links:
            a[row[lid], j] = 1.0
    return TAPInstance(kappa=kappa, highway_scale=highway_scale, links=tuple(links),
                       od_pairs=od_pairs, paths=tuple(paths), incidence=a)


def instances_equal(a: TAPInstance, b: TAPInstance) -> bool:
    return (a.kappa == b.kappa and a.highway_scale == b.highway_scale
            and a.links == b.links and a.od_pairs == b.od_pairs
            and a.paths == b.paths and np.array_equal(a.incidence, b.incidence))
