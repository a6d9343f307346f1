"""Vector-field abstraction, synthetic strongly monotone instances, and
sampling-based estimation of the strong-monotonicity and Lipschitz constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import Box

MU_SAFETY = 0.9
L_SAFETY = 1.1
MU_FLOOR = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    # Philox is counter based, so sample streams are reproducible across
    # platforms and stable under prefix extension.
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True)
class VectorField:
    """Deterministic operator g: R^dim -> R^dim."""

    eval: Callable[[np.ndarray], np.ndarray]
    dim: int

    def __call__(self, x) -> np.ndarray:
        out = np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)
        if out.shape != (self.dim,):
            raise ValueError(f"operator returned shape {out.shape}, expected ({self.dim},)")
        return out


@dataclass(frozen=True)
class AffineOperator:
    """g(x) = M x + b. Strongly monotone iff sym(M) has a positive minimum eigenvalue."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.offset, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or b.shape != (m.shape[0],):
            raise ValueError("matrix must be square and offset of matching length")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def mu(self) -> float:
        sym = 0.5 * (self.matrix + self.matrix.T)
        return float(np.linalg.eigvalsh(sym)[0])

    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def as_field(self) -> VectorField:
        return VectorField(eval=self.__call__, dim=self.dim)


@dataclass(frozen=True)
class ConstantsEstimate:
    mu_hat: float
    L_hat: float
    n_samples: int
    seed: int
    nonmonotone_samples: bool = False

    @property
    def gamma_hat(self) -> float:
        return self.L_hat / self.mu_hat


def estimate_constants(g, feasible_set, n_samples: int, seed: int) -> ConstantsEstimate:
    """Estimate mu and L of g over the set from sampled feasible pairs.

    mu_hat is the smallest <g(x)-g(y), x-y>/||x-y||^2 over consecutive sample
    pairs (times a 0.9 safety factor, floored at 1e-12); L_hat is the largest
    ||g(x)-g(y)||/||x-y|| (times 1.1). Consecutive pairing keeps the estimate
    monotone in n_samples for a fixed seed.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    rng = make_rng(seed)
    pts = feasible_set.sample(rng, n_samples)
    vals = np.array([g(p) for p in pts])
    dx = pts[1:] - pts[:-1]
    dg = vals[1:] - vals[:-1]
    nx2 = np.einsum("ij,ij->i", dx, dx)
    keep = nx2 > 0
    dx, dg, nx2 = dx[keep], dg[keep], nx2[keep]
    if dx.shape[0] == 0:
        raise ValueError("all sampled pairs coincide; cannot estimate constants")
    ratios_mu = np.einsum("ij,ij->i", dg, dx) / nx2
    ratios_l = np.sqrt(np.einsum("ij,ij->i", dg, dg) / nx2)
    mu_raw = float(np.min(ratios_mu))
    return ConstantsEstimate(
        mu_hat=MU_SAFETY * max(mu_raw, MU_FLOOR),
        L_hat=L_SAFETY * float(np.max(ratios_l)),
        n_samples=n_samples,
        seed=seed,
        nonmonotone_samples=mu_raw < 0,
    )


def make_affine_instance(dim: int, mu: float, skew_scale: float, seed: int):
    """Seeded affine operator M = mu*I + skew_scale*(A - A^T)/2 on the box [-1, 1]^dim.

    The symmetric part of M is exactly mu*I, so the strong-monotonicity
    constant is mu and the Lipschitz constant is ||M||_2.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = make_rng(seed)
    a = rng.standard_normal((dim, dim))
    m = mu * np.eye(dim) + skew_scale * 0.5 * (a - a.T)
    b = 0.3 * rng.uniform(-1.0, 1.0, size=dim)
    box = Box(lower=-np.ones(dim), upper=np.ones(dim))
    return AffineOperator(matrix=m, offset=b), box
