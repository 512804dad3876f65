"""Optimal transport values on finite pointed metric spaces.

Two entry points.  ``w1`` compares two nonnegative measures of equal
mass and returns the usual earth-mover value together with a coupling.
``kr_norm`` takes an arbitrary signed measure and returns its dual-Lip
norm, i.e. the largest integral against functions that are 1-Lipschitz
and vanish at the basepoint; the basepoint absorbs whatever mass does
not cancel.  Both report certifying potentials and the duality gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, SolverError
from .measures import SignedMeasure
from .metric import FiniteMetricSpace
from .optim import SCALE, FlowProblem, FlowResult, solve_flow

__all__ = ["TransportResult", "w1", "kr_norm", "verify_duality"]


@dataclass(frozen=True)
class TransportResult:
    """Value, witness plan, and dual certificate of a transport solve.

    kind is "w1" or "kr".  For "w1" the plan is a coupling: row sums
    reproduce mu and column sums reproduce eta (diagonal entries are
    mass that stays put).  For "kr" the plan moves mu to zero, with the
    basepoint supplying or absorbing the uncancelled mass.  potentials
    is a vector g with g(basepoint) = 0 and |g_i - g_j| <= d(i, j);
    gap is |value - sum_i coeff_i g_i|.
    """

    kind: str
    space: FiniteMetricSpace
    value: float
    plan: dict[tuple[int, int], float]
    potentials: np.ndarray
    gap: float
    mu: SignedMeasure
    eta: SignedMeasure | None = None


def _arcs_for(space: FiniteMetricSpace) -> tuple[tuple[int, int, float], ...]:
    n = space.n
    return tuple((i, j, float(space.dist[i, j])) for i in range(n) for j in range(n) if i != j)


def _decompose_paths(n: int, arcs, flow_int, supplies_int) -> dict[tuple[int, int], int]:
    """Split an integer flow into source-to-sink transfers.

    Arc costs are positive off the diagonal, so an optimal flow is
    acyclic and every walk from a surplus node ends in a deficit node.
    """
    remaining = list(flow_int)
    out_arcs: list[list[int]] = [[] for _ in range(n)]
    for k, (u, v, _) in enumerate(arcs):
        if remaining[k] > 0:
            out_arcs[u].append(k)
    bal = list(supplies_int)
    moved: dict[tuple[int, int], int] = {}
    guard = 0
    while True:
        src = next((i for i in range(n) if bal[i] > 0), -1)
        if src < 0:
            break
        v = src
        path: list[int] = []
        while bal[v] >= 0:
            k = next((k for k in out_arcs[v] if remaining[k] > 0), -1)
            if k < 0:
                raise SolverError("flow decomposition lost conservation")
            path.append(k)
            v = arcs[k][1]
            if len(path) > n:
                raise SolverError("flow decomposition found a cycle")
        amount = min(bal[src], -bal[v], min(remaining[k] for k in path))
        bal[src] -= amount
        bal[v] += amount
        for k in path:
            remaining[k] -= amount
        key = (src, v)
        moved[key] = moved.get(key, 0) + amount
        guard += 1
        if guard > n + len(arcs) + 4:
            raise SolverError("flow decomposition did not terminate")
    return moved


def w1(mu: SignedMeasure, eta: SignedMeasure, tol: float = 1e-9) -> TransportResult:
    """Earth-mover distance between nonnegative measures of equal mass."""
    if mu.space is not eta.space and mu.space != eta.space:
        raise ContractError("measures live on different spaces")
    if not mu.is_nonnegative() or not eta.is_nonnegative():
        raise ContractError(
            "w1 needs nonnegative measures on both sides; "
            "compare signed measures with kr_norm of their difference"
        )
    m_mu, m_eta = mu.mass(), eta.mass()
    scale = max(1.0, abs(m_mu), abs(m_eta))
    if abs(m_mu - m_eta) > tol * scale:
        raise ContractError(f"w1 needs equal masses, got {m_mu!r} vs {m_eta!r}")

    space = mu.space
    n = space.n
    supplies = mu.as_vector() - eta.as_vector()
    # force an exactly balanced instance; the drift is below tol by the check above
    supplies -= np.sum(supplies) / max(n, 1)
    arcs = _arcs_for(space)
    res = solve_flow(FlowProblem(n, supplies, arcs), tol=tol)

    moved = _decompose_paths(n, arcs, res.flow_int, res.supplies_int)
    plan: dict[tuple[int, int], float] = {}
    moved_out = [0] * n
    for (i, j), a in moved.items():
        plan[(i, j)] = a / SCALE
        moved_out[i] += a
    for i in range(n):
        stay = float(mu[i]) - moved_out[i] / SCALE
        if stay > 0.0:
            plan[(i, i)] = stay

    g = _shifted_potentials(space, res)
    diff = [mu[i] - eta[i] for i in range(n)]
    dual = math.fsum(diff[i] * g[i] for i in range(n))
    value = res.cost
    out = TransportResult("w1", space, value, plan, g, abs(value - dual), mu, eta)
    _certify(out, tol)
    return out


def kr_norm(mu: SignedMeasure, tol: float = 1e-9) -> TransportResult:
    """Dual-Lipschitz norm of a signed measure, basepoint fixed at zero.

    Equals the least cost of transporting mu to the zero measure when
    the basepoint may emit or swallow mass for free.  For point masses,
    kr_norm(dirac(x) - dirac(y)) is exactly d(x, y).
    """
    space = mu.space
    n = space.n
    bp = space.basepoint
    supplies = mu.as_vector()
    supplies[bp] = -math.fsum(float(supplies[i]) for i in range(n) if i != bp)
    arcs = _arcs_for(space)
    res = solve_flow(FlowProblem(n, supplies, arcs), tol=tol)

    plan = {
        (arcs[k][0], arcs[k][1]): f / SCALE
        for k, f in enumerate(res.flow_int)
        if f > 0
    }
    g = _shifted_potentials(space, res)
    dual = math.fsum(float(mu[i]) * g[i] for i in range(n))
    value = res.cost
    out = TransportResult("kr", space, value, plan, g, abs(value - dual), mu, None)
    _certify(out, tol)
    return out


def _shifted_potentials(space: FiniteMetricSpace, res: FlowResult) -> np.ndarray:
    base = res.potentials_int[space.basepoint]
    return np.array([(gi - base) / SCALE for gi in res.potentials_int])


def _certify(result: TransportResult, tol: float) -> None:
    ok, msg = verify_duality(result, tol=max(tol, 1e-9))
    if not ok:
        raise SolverError(f"transport certificate failed: {msg}")


def verify_duality(result: TransportResult, tol: float = 1e-9) -> tuple[bool, str]:
    """Recheck a transport result from scratch.

    Returns (True, "ok") or (False, reason); the reason names the first
    broken condition: a potential pair that stretches farther than the
    distance, a nonzero basepoint value, a negative or misaligned plan,
    marginals that miss the measures, or a primal/dual value mismatch.
    """
    space = result.space
    n = space.n
    d = space.dist
    g = result.potentials
    scale_d = max(1.0, float(space.diameter))
    mass = result.mu.total_variation() if hasattr(result.mu, "total_variation") else 1.0

    if abs(float(g[space.basepoint])) > tol:
        return False, f"potential at the basepoint is {float(g[space.basepoint]):.3e}, not 0"
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            excess = float(g[i] - g[j]) - float(d[i, j])
            if excess > tol * scale_d:
                a, bl = space.labels[i], space.labels[j]
                return False, (
                    f"potential stretches pair ({a!r}, {bl!r}) by {excess:.3e} beyond their distance"
                )

    for (i, j), fv in result.plan.items():
        if not (0 <= i < n and 0 <= j < n):
            return False, f"plan entry ({i}, {j}) indexes outside the space"
        if fv < -tol:
            return False, f"plan entry ({i}, {j}) is negative: {fv:.3e}"

    plan_cost = math.fsum(fv * float(d[i, j]) for (i, j), fv in result.plan.items())
    cost_scale = max(1.0, abs(result.value), mass * scale_d)
    if abs(plan_cost - result.value) > tol * cost_scale:
        return False, (
            f"plan cost {plan_cost!r} disagrees with the reported value {result.value!r}"
        )

    if result.kind == "w1":
        if result.eta is None:
            return False, "a w1 result must carry both measures"
        row = [0.0] * n
        col = [0.0] * n
        for (i, j), fv in result.plan.items():
            row[i] += fv
            col[j] += fv
        for i in range(n):
            if abs(row[i] - result.mu[i]) > tol * cost_scale:
                return False, f"plan row {i} sums to {row[i]!r}, expected mu = {result.mu[i]!r}"
            if abs(col[i] - result.eta[i]) > tol * cost_scale:
                return False, f"plan column {i} sums to {col[i]!r}, expected eta = {result.eta[i]!r}"
    else:
        bp = space.basepoint
        for i in range(n):
            if i == bp:
                continue
            div = math.fsum(
                (fv if a == i else 0.0) - (fv if b == i else 0.0)
                for (a, b), fv in result.plan.items()
            )
            if abs(div - result.mu[i]) > tol * cost_scale:
                return False, (
                    f"plan divergence at node {i} is {div!r}, expected coefficient {result.mu[i]!r}"
                )

    coeff = result.mu.as_vector()
    if result.kind == "w1":
        coeff = coeff - result.eta.as_vector()
    dual = math.fsum(float(coeff[i]) * float(g[i]) for i in range(n))
    if abs(dual - result.value) > tol * cost_scale:
        return False, f"duality gap {abs(dual - result.value):.3e} exceeds tolerance"
    return True, "ok"
