"""Solver configuration.

Every numeric tolerance used by the solvers funnels through a single
record so that tests and the CLI can tighten or relax all of them in
one place.  The default working tolerance is 1e-9; metric checks read
it relative to the largest distance, flow and LP certificates read it
as an absolute bound after rescaling by the natural problem scale.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    # threshold below which a simplex reduced cost or pivot counts as zero
    pivot_tol: float = 1e-10
    # hard iteration cap, a safety net on top of the Bland fallback
    max_iterations: int = 200_000
    # iterations without objective progress before switching to Bland's rule
    stall_limit: int = 120


DEFAULT_CONFIG = SolverConfig()
