"""Oracle-call accounting shared by all solvers.

Diagnostic work (gap certificates, natural-residual probes) is tracked in
separate fields so the algorithmic counters stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OracleCounters:
    lmo: int = 0
    proj: int = 0
    g_evals: int = 0
    diag_proj: int = 0

    def copy(self) -> "OracleCounters":
        return OracleCounters(self.lmo, self.proj, self.g_evals, self.diag_proj)
