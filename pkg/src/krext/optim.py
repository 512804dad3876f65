"""Optimization kernels: min-cost flow and a dense revised simplex.

The flow solver runs successive shortest paths with node potentials on
an exactly quantized copy of the instance.  Costs and supplies are
scaled by 2**60 and rounded; multiplying a float by a power of two is
exact, so the only perturbation is the final rounding to the dyadic
grid, about 1e-18 at unit scale.  All pivoting then happens in integer
arithmetic, which makes the optimum of the quantized instance exact and
the duality gap identically zero.

The LP solver is a two-phase revised simplex over dense numpy arrays.
Pricing is Dantzig by default and falls back to Bland's rule after a
degenerate stall, which restores the termination guarantee.  Optimal
bases are certified before returning: primal residuals, dual residuals
and complementary slackness are all rechecked against the configured
tolerance.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .errors import ContractError, SolverError

SCALE = 2**60


def _quantize(x: float) -> int:
    # x * SCALE only shifts the exponent, so the round is the sole rounding step
    return int(round(float(x) * SCALE))


def _quantize_balanced(values: np.ndarray) -> list[int]:
    """Quantize a near-balanced vector so the integer sum is exactly zero."""
    out: list[int] = []
    cum = 0.0
    prev = 0
    for v in values:
        cum += float(v)
        cur = _quantize(cum)
        out.append(cur - prev)
        prev = cur
    if out:
        out[-1] -= prev
    return out


@dataclass(frozen=True)
class FlowProblem:
    """Min-cost flow instance on node indices 0..n_nodes-1.

    arcs: (u, v, cost) triples with nonnegative costs.
    capacities: optional per-arc upper bounds, None meaning uncapacitated.
    supplies: positive for sources, negative for sinks, summing to zero.
    """

    n_nodes: int
    supplies: np.ndarray
    arcs: tuple[tuple[int, int, float], ...]
    capacities: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "supplies", np.asarray(self.supplies, dtype=float))
        object.__setattr__(self, "arcs", tuple((int(u), int(v), float(c)) for u, v, c in self.arcs))
        if self.capacities is not None:
            object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))


@dataclass(frozen=True)
class FlowResult:
    flow: np.ndarray          # one value per arc
    potentials: np.ndarray    # dual node values g with g_u - g_v <= cost on arcs
    cost: float
    # exact integer payload on the 2**-60 grid, for callers that keep computing
    flow_int: tuple[int, ...]
    potentials_int: tuple[int, ...]
    cost_int: int
    supplies_int: tuple[int, ...] = ()


def solve_flow(problem: FlowProblem, tol: float = 1e-9) -> FlowResult:
    """Solve a min-cost flow problem exactly on the quantized grid.

    Returns flows, certifying node potentials and the optimal cost.  The
    potentials g satisfy g_u - g_v <= cost(u, v) on every arc that keeps
    residual capacity, with equality on arcs carrying flow, so
    sum_i supplies_i * g_i equals the cost exactly.
    """
    n = problem.n_nodes
    if problem.supplies.shape != (n,):
        raise ContractError(f"supplies must have shape ({n},)")
    if not np.all(np.isfinite(problem.supplies)):
        raise ContractError("supplies must be finite")
    total = float(np.sum(problem.supplies))
    mass = float(np.sum(np.abs(problem.supplies)))
    if abs(total) > tol * max(1.0, mass):
        raise ContractError(f"unbalanced supplies: net {total:.3e}")
    for u, v, c in problem.arcs:
        if not (0 <= u < n and 0 <= v < n):
            raise ContractError(f"arc ({u},{v}) out of range")
        if u == v:
            raise ContractError(f"self-loop arc at node {u}")
        if not (math.isfinite(c) and c >= 0.0):
            raise ContractError(f"arc ({u},{v}) needs a finite nonnegative cost")
    caps = problem.capacities
    if caps is not None and len(caps) != len(problem.arcs):
        raise ContractError("capacities length must match arcs")

    b = _quantize_balanced(problem.supplies)
    total_excess = sum(x for x in b if x > 0)
    INF_CAP = total_excess + 1

    # residual graph: paired forward/backward edges
    head: list[int] = []
    cap: list[int] = []
    cost: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n)]

    def add_edge(u: int, v: int, cp: int, cs: int) -> None:
        adj[u].append(len(head)); head.append(v); cap.append(cp); cost.append(cs)
        adj[v].append(len(head)); head.append(u); cap.append(0); cost.append(-cs)

    for k, (u, v, c) in enumerate(problem.arcs):
        cpk = INF_CAP if caps is None or caps[k] is None else _quantize(caps[k])
        if cpk < 0:
            raise ContractError(f"negative capacity on arc {k}")
        add_edge(u, v, cpk, _quantize(c))

    excess = list(b)
    pi = [0] * n
    INF = None
    augmentations = 0
    max_aug = 4 * (n + len(problem.arcs)) + 16

    while total_excess > 0:
        sources = [i for i in range(n) if excess[i] > 0]
        dist: list[int | None] = [INF] * n
        parent_edge = [-1] * n
        pq: list[tuple[int, int]] = []
        for s in sources:
            dist[s] = 0
            heapq.heappush(pq, (0, s))
        best_t = -1
        while pq:
            dv, v = heapq.heappop(pq)
            if dist[v] != dv:
                continue
            if excess[v] < 0 and best_t < 0:
                best_t = v
                break
            for e in adj[v]:
                if cap[e] <= 0:
                    continue
                w = head[e]
                nd = dv + cost[e] + pi[v] - pi[w]
                if dist[w] is None or nd < dist[w]:
                    dist[w] = nd
                    parent_edge[w] = e
                    heapq.heappush(pq, (nd, w))
        if best_t < 0:
            raise ContractError("flow problem is infeasible: a deficit node is unreachable")
        dt = dist[best_t]
        for v in range(n):
            if dist[v] is not None:
                pi[v] += min(dist[v], dt)
            else:
                pi[v] += dt
        # trace the augmenting path and its bottleneck
        amount = -excess[best_t]
        v = best_t
        path: list[int] = []
        while parent_edge[v] >= 0:
            e = parent_edge[v]
            path.append(e)
            amount = min(amount, cap[e])
            v = head[e ^ 1]
        amount = min(amount, excess[v])
        for e in path:
            cap[e] -= amount
            cap[e ^ 1] += amount
        excess[v] -= amount
        excess[best_t] += amount
        total_excess -= amount
        augmentations += 1
        if augmentations > max_aug:
            raise SolverError("flow augmentation did not converge")

    flow_int = tuple(cap[2 * k + 1] for k in range(len(problem.arcs)))
    cost_int = 0
    for k in range(len(problem.arcs)):
        cost_int += flow_int[k] * cost[2 * k]
    g_int = tuple(-p for p in pi)

    # exact certificates on the quantized instance; failure means a bug
    for k, (u, v, _) in enumerate(problem.arcs):
        if cap[2 * k] > 0 and cost[2 * k] + pi[u] - pi[v] < 0:
            raise SolverError("optimality certificate failed on a residual arc")
        if flow_int[k] > 0 and cost[2 * k] + pi[u] - pi[v] > 0:
            raise SolverError("complementary slackness failed on a flow arc")
    dual_int = sum(bi * gi for bi, gi in zip(b, g_int))
    if dual_int != cost_int:
        raise SolverError("flow duality gap is nonzero on the quantized instance")

    return FlowResult(
        flow=np.array([f / SCALE for f in flow_int]),
        potentials=np.array([g / SCALE for g in g_int]),
        cost=cost_int / SCALE / SCALE,
        flow_int=flow_int,
        potentials_int=g_int,
        cost_int=cost_int,
        supplies_int=tuple(b),
    )


# ---------------------------------------------------------------------------
# linear programming


@dataclass(frozen=True)
class LinearProgram:
    """min (or max) c.x subject to row senses and box bounds.

    senses holds one of "<=", "==", ">=" per row.  Default bounds are
    x >= 0; pass -inf/+inf entries for free variables.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None
    maximize: bool = False

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2:
            raise ContractError("A must be a matrix")
        m, n = A.shape
        if c.shape != (n,) or b.shape != (m,):
            raise ContractError("inconsistent LP dimensions")
        senses = tuple(self.senses)
        if len(senses) != m or any(s not in ("<=", "==", ">=") for s in senses):
            raise ContractError("each row sense must be one of <=, ==, >=")
        lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float)
        ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float)
        if lb.shape != (n,) or ub.shape != (n,):
            raise ContractError("bound arrays must match the variable count")
        if np.any(lb > ub):
            raise ContractError("lower bound exceeds upper bound")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ContractError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)


@dataclass(frozen=True)
class LPResult:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None             # primal solution in original variables
    y: np.ndarray | None             # duals of the original rows (minimize convention)
    objective: float | None
    iterations: int = 0


class _Simplex:
    """Primal simplex on min c.x, A x = b, x >= 0, b >= 0."""

    def __init__(self, A: np.ndarray, b: np.ndarray, config: SolverConfig):
        self.A = A
        self.b = b
        self.cfg = config
        self.m, self.n = A.shape
        self.basis: list[int] = []
        self.iterations = 0

    def _solve_basis(self, rhs: np.ndarray, transpose=False) -> np.ndarray:
        B = self.A[:, self.basis]
        try:
            return np.linalg.solve(B.T if transpose else B, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular simplex basis: {exc}") from exc

    def run(self, c: np.ndarray, allowed: np.ndarray) -> tuple[str, np.ndarray]:
        """Minimize c.x from the current basis; returns (status, xB).

        allowed masks the columns that may enter.  Uses Dantzig pricing
        until a degenerate stall, then Bland's rule for termination.
        """
        cfg = self.cfg
        bland = False
        stall = 0
        last_obj = None
        while True:
            self.iterations += 1
            if self.iterations > cfg.max_iterations:
                raise SolverError("simplex iteration limit exceeded")
            xB = self._solve_basis(self.b)
            y = self._solve_basis(c[self.basis], transpose=True)
            rc = c - y @ self.A
            rc[self.basis] = 0.0
            candidates = np.nonzero(allowed & (rc < -cfg.pivot_tol))[0]
            if candidates.size == 0:
                return "optimal", xB
            j = int(candidates[0]) if bland else int(candidates[np.argmin(rc[candidates])])
            d = self._solve_basis(self.A[:, j])
            pos = np.nonzero(d > cfg.pivot_tol)[0]
            if pos.size == 0:
                return "unbounded", xB
            safe_xB = np.maximum(xB, 0.0)
            ratios = safe_xB[pos] / d[pos]
            theta = ratios.min()
            ties = pos[np.nonzero(ratios <= theta + cfg.pivot_tol * (1.0 + theta))[0]]
            # Bland tie break: leave the smallest column index
            leave_row = min(ties, key=lambda r: self.basis[int(r)])
            obj = float(c[self.basis] @ xB)
            if last_obj is not None and obj > last_obj - 1e-13 * (1.0 + abs(last_obj)):
                stall += 1
                if stall >= cfg.stall_limit:
                    bland = True
            else:
                stall = 0
            last_obj = obj
            self.basis[int(leave_row)] = j


def solve_lp(problem: LinearProgram, tol: float = 1e-9,
             config: SolverConfig | None = None) -> LPResult:
    """Two-phase revised simplex with a certified optimal basis.

    The result carries the primal point in the original variables, the
    duals of the original rows, and the objective in the original sense.
    Duals follow the minimize convention; they are negated internally
    when the problem maximizes so that strong duality reads the same.
    """
    cfg = config or DEFAULT_CONFIG
    if config is None and tol != cfg.tol:
        cfg = SolverConfig(tol=tol, pivot_tol=cfg.pivot_tol,
                           max_iterations=cfg.max_iterations, stall_limit=cfg.stall_limit)
    p = problem
    m, n = p.A.shape
    sign = -1.0 if p.maximize else 1.0
    c0 = sign * p.c

    # variable transforms to x' >= 0
    cols: list[np.ndarray] = []
    cobj: list[float] = []
    var_map: list[tuple] = []
    const = 0.0
    bound_rows: list[tuple[int, float]] = []   # (column index, upper value) for shifted vars
    for j in range(n):
        lo, hi = p.lb[j], p.ub[j]
        col = p.A[:, j]
        if lo == -np.inf and hi == np.inf:
            var_map.append(("split", len(cols), len(cols) + 1))
            cols.append(col.copy()); cobj.append(c0[j])
            cols.append(-col); cobj.append(-c0[j])
        elif lo == -np.inf:
            # mirror around the finite upper bound
            var_map.append(("mirror", len(cols), hi))
            const += c0[j] * hi
            cols.append(-col); cobj.append(-c0[j])
        else:
            var_map.append(("shift", len(cols), lo))
            const += c0[j] * lo
            cols.append(col.copy()); cobj.append(c0[j])
            if hi != np.inf:
                bound_rows.append((len(cols) - 1, hi - lo))

    nx = len(cols)
    m2 = m + len(bound_rows)
    A2 = np.zeros((m2, nx))
    if nx:
        A2[:m, :] = np.column_stack(cols) if cols else np.zeros((m, 0))
    b2 = p.b.astype(float).copy()
    for j in range(n):
        kind = var_map[j]
        if kind[0] == "shift" and kind[2] != 0.0:
            b2 -= p.A[:, j] * kind[2]
        elif kind[0] == "mirror":
            b2 -= p.A[:, j] * kind[2]
    b2 = np.concatenate([b2, [val for _, val in bound_rows]])
    for r, (cidx, _) in enumerate(bound_rows):
        A2[m + r, cidx] = 1.0
    senses2 = list(p.senses) + ["<="] * len(bound_rows)

    # slacks, then b >= 0 normalization
    slack_cols = []
    for i, s in enumerate(senses2):
        if s == "<=":
            e = np.zeros(m2); e[i] = 1.0
            slack_cols.append((i, e, 1.0))
        elif s == ">=":
            e = np.zeros(m2); e[i] = -1.0
            slack_cols.append((i, e, -1.0))
    ns = len(slack_cols)
    A3 = np.zeros((m2, nx + ns))
    A3[:, :nx] = A2
    c3 = np.concatenate([np.array(cobj, dtype=float), np.zeros(ns)])
    slack_of_row = {}
    for k, (i, e, orient) in enumerate(slack_cols):
        A3[:, nx + k] = e
        slack_of_row[i] = (nx + k, orient)
    row_sign = np.ones(m2)
    for i in range(m2):
        if b2[i] < 0:
            A3[i, :] *= -1.0
            b2[i] = -b2[i]
            row_sign[i] = -1.0

    # initial basis: usable +1 slack columns, artificials elsewhere
    basis = [-1] * m2
    artificial_cols: list[int] = []
    extra = []
    for i in range(m2):
        got = slack_of_row.get(i)
        if got is not None:
            jcol, orient = got
            if A3[i, jcol] == 1.0:
                basis[i] = jcol
                continue
        art = np.zeros(m2); art[i] = 1.0
        extra.append(art)
        basis[i] = A3.shape[1] + len(extra) - 1
        artificial_cols.append(basis[i])
    if extra:
        A3 = np.column_stack([A3] + extra)
    ntot = A3.shape[1]
    nreal = nx + ns

    sx = _Simplex(A3, b2, cfg)
    sx.basis = basis

    scale_b = float(np.max(np.abs(b2))) if m2 else 1.0
    feas_tol = cfg.tol * max(1.0, scale_b)

    if artificial_cols:
        c_phase1 = np.zeros(ntot)
        for j in artificial_cols:
            c_phase1[j] = 1.0
        # artificials start basic and may leave, but never re-enter
        allowed1 = np.zeros(ntot, dtype=bool)
        allowed1[:nreal] = True
        status, xB = sx.run(c_phase1, allowed1)
        phase1_obj = float(c_phase1[sx.basis] @ np.maximum(xB, 0.0))
        if status != "optimal" or phase1_obj > feas_tol:
            return LPResult("infeasible", None, None, None, sx.iterations)
        # pivot leftover artificials out, or drop their rows as redundant
        art_set = set(artificial_cols)
        drop_rows: list[int] = []
        for r in range(m2):
            if sx.basis[r] in art_set:
                w = np.zeros(m2); w[r] = 1.0
                row = sx._solve_basis(w, transpose=True) @ sx.A[:, :nreal]
                pick = -1
                for j in range(nreal):
                    if j not in sx.basis and abs(row[j]) > cfg.pivot_tol:
                        pick = j
                        break
                if pick >= 0:
                    sx.basis[r] = pick
                else:
                    drop_rows.append(r)
        if drop_rows:
            keep = [r for r in range(m2) if r not in set(drop_rows)]
            A3 = A3[keep, :]
            b2 = b2[keep]
            row_keep = keep
            sx.A = A3
            sx.b = b2
            sx.m = len(keep)
            sx.basis = [sx.basis[r] for r in keep]
        else:
            row_keep = list(range(m2))
    else:
        row_keep = list(range(m2))

    c_phase2 = np.concatenate([c3, np.zeros(ntot - nreal)])
    allowed2 = np.zeros(ntot, dtype=bool)
    allowed2[:nreal] = True
    status, xB = sx.run(c_phase2, allowed2)
    if status == "unbounded":
        return LPResult("unbounded", None, None, None, sx.iterations)

    # reconstruct the primal point
    xfull = np.zeros(ntot)
    for r, bi in enumerate(sx.basis):
        xfull[bi] = max(xB[r], 0.0)
    x = np.zeros(n)
    for j in range(n):
        kind = var_map[j]
        if kind[0] == "split":
            x[j] = xfull[kind[1]] - xfull[kind[2]]
        elif kind[0] == "mirror":
            x[j] = kind[2] - xfull[kind[1]]
        else:
            x[j] = kind[2] + xfull[kind[1]]
    objective = float(c0 @ x) + 0.0

    # duals on the surviving rows, mapped back to the original rows
    yb = sx._solve_basis(c_phase2[sx.basis], transpose=True)
    y = np.zeros(m)
    for pos, r in enumerate(row_keep):
        if r < m:
            y[r] = yb[pos] * row_sign[r]

    # certification: primal feasibility, dual feasibility, strong duality
    Ax = sx.A @ xfull[: sx.A.shape[1]]
    p_res = float(np.max(np.abs(Ax - sx.b))) if sx.A.shape[0] else 0.0
    rc = c_phase2 - yb @ sx.A
    d_res = float(max(0.0, -np.min(rc[:nreal]))) if nreal else 0.0
    cert_tol = cfg.tol * max(1.0, scale_b, float(np.max(np.abs(c_phase2))) if ntot else 1.0)
    gap = abs(float(c_phase2[sx.basis] @ xB) - float(yb @ sx.b))
    if p_res > 100 * cert_tol or d_res > 100 * cert_tol or gap > 100 * cert_tol * (1.0 + abs(objective)):
        raise SolverError(
            f"optimal basis failed certification: primal {p_res:.2e}, dual {d_res:.2e}, gap {gap:.2e}"
        )

    if p.maximize:
        objective = -objective
        y = -y
    return LPResult("optimal", x, y, objective, sx.iterations)
