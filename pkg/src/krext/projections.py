"""Gentle partitions of unity, random projections, and their calculus.

A random projection assigns to every point x of the ambient space a
measure rows[x] supported on a subset M, with rows[x] = delta_x inside
M.  Its quality is the least K with dual-Lip distance between rows at
most K*d(x, y) for all pairs; strong projections carry probability
measures.  A gentle partition is the density-side picture: a finite
probability space (Omega, P), a nonnegative density matrix psi, and an
anchor map gamma into M.  The two pictures convert into each other, and
the conversions here are arranged to be exact in floating point: the
partition weights are dyadic (powers of two), so dividing and
re-multiplying coefficients by them loses nothing.

Also here: the explicit two-atom construction for uniformly discrete
subsets, minimal-K synthesis as a single linear program, the asymptotic
subset-growth experiment, and the water-filling retraction onto the
nonnegative l1 ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .errors import ContractError, SolverError
from .measures import SignedMeasure
from .metric import FiniteMetricSpace, Subspace
from .optim import LinearProgram, solve_lp
from .transport import kr_norm

__all__ = [
    "GentlePartition",
    "RandomProjection",
    "SynthesisResult",
    "ProfileEntry",
    "identity_projection",
    "gentle_constant",
    "gentle_to_projection",
    "projection_constant",
    "weighted_tv_constant",
    "projection_to_gentle",
    "uniform_discrete_projection",
    "uniform_discrete_bound",
    "synthesize_min_k",
    "asymptotic_profile",
    "retract_l1_ball",
]

_VALID_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GentlePartition:
    """Finite probability space with anchored densities over a subset.

    weights is the probability vector P over Omega; psi[w, x] >= 0 is
    the density of outcome w at point x; gamma[w] is the anchor of w, a
    member of the subset.  Columns of exterior points average to one
    under P.  Columns of member points are either identically zero or
    push forward to the point mass at that member — both encode the
    same induced projection row delta_x, and the second form is what
    projection_to_gentle produces so that the round trip is exact.
    """

    subset: Subspace
    weights: np.ndarray
    psi: np.ndarray
    gamma: tuple[int, ...]

    def __post_init__(self):
        sub = self.subset
        space = sub.parent
        n = space.n
        weights = np.asarray(self.weights, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        gamma = tuple(int(g) for g in self.gamma)
        if weights.ndim != 1 or weights.size == 0:
            raise ContractError("weights must be a nonempty vector")
        k = weights.size
        if psi.shape != (k, n):
            raise ContractError(f"psi must have shape ({k}, {n}), got {psi.shape}")
        if len(gamma) != k:
            raise ContractError("gamma must assign an anchor to every outcome")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(psi))):
            raise ContractError("weights and psi must be finite")
        if np.any(weights < -_VALID_TOL):
            raise ContractError("weights must be nonnegative")
        total = math.fsum(float(w) for w in weights)
        if abs(total - 1.0) > _VALID_TOL:
            raise ContractError(f"weights must sum to 1, got {total!r}")
        if np.any(psi < -_VALID_TOL):
            w, x = map(int, np.argwhere(psi < -_VALID_TOL)[0])
            raise ContractError(f"psi[{w}, {x}] = {psi[w, x]!r} is negative")
        members = set(sub.members)
        for w, g in enumerate(gamma):
            if g not in members:
                raise ContractError(f"gamma[{w}] = {g} is not a subset member")
        for x in range(n):
            avg = math.fsum(float(weights[w]) * float(psi[w, x]) for w in range(k))
            if x in members:
                if abs(avg) <= _VALID_TOL and float(np.max(np.abs(psi[:, x]))) <= _VALID_TOL:
                    continue
                # the column may instead push forward to the point mass at x
                for m in sub.members:
                    push = math.fsum(
                        float(weights[w]) * float(psi[w, x])
                        for w in range(k) if gamma[w] == m
                    )
                    want = 1.0 if m == x else 0.0
                    if abs(push - want) > _VALID_TOL:
                        raise ContractError(
                            f"member column {x} must vanish or push forward to its "
                            f"own point mass; anchor {m} collects {push!r}"
                        )
            else:
                if abs(avg - 1.0) > _VALID_TOL:
                    raise ContractError(
                        f"exterior column {x} must average to 1 under P, got {avg!r}"
                    )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "gamma", gamma)

    @property
    def space(self) -> FiniteMetricSpace:
        return self.subset.parent

    @property
    def n_outcomes(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True)
class RandomProjection:
    """One measure per point of the space, each supported in the subset.

    rows[x] is exactly the point mass at x for subset members.  When
    strong is set, every row must be a probability measure.
    """

    subset: Subspace
    rows: tuple[SignedMeasure, ...]
    strong: bool

    def __post_init__(self):
        sub = self.subset
        space = sub.parent
        n = space.n
        rows = tuple(self.rows)
        if len(rows) != n:
            raise ContractError(f"need one row per point, got {len(rows)} for {n}")
        members = set(sub.members)
        for x, row in enumerate(rows):
            if row.space != space:
                raise ContractError(f"row {x} lives on a different space")
            for i in row.support:
                if i not in members:
                    raise ContractError(
                        f"row {x} puts mass on point {space.labels[i]!r} outside the subset"
                    )
            if x in members and row.coeff != {x: 1.0}:
                raise ContractError(
                    f"row for subset member {space.labels[x]!r} must be exactly its point mass"
                )
            if self.strong:
                if not row.is_nonnegative(_VALID_TOL):
                    raise ContractError(f"strong projection row {x} has a negative coefficient")
                if abs(row.mass() - 1.0) > _VALID_TOL:
                    raise ContractError(
                        f"strong projection row {x} has mass {row.mass()!r}, expected 1"
                    )
        object.__setattr__(self, "rows", rows)

    @property
    def space(self) -> FiniteMetricSpace:
        return self.subset.parent


def identity_projection(space: FiniteMetricSpace) -> RandomProjection:
    """The projection onto M = X: every row is its own point mass."""
    sub = Subspace(space, tuple(range(space.n)))
    rows = tuple(SignedMeasure.dirac(space, x) for x in range(space.n))
    return RandomProjection(sub, rows, strong=True)


# ---------------------------------------------------------------------------
# constants


def gentle_constant(g: GentlePartition) -> float:
    """Least K for which the partition is K-gentle.

    Maximum over ordered pairs x != y of
    sum_w P(w) * d(gamma(w), x) * |psi(w, x) - psi(w, y)| / d(x, y).
    """
    space = g.space
    n = space.n
    d = space.dist
    P = g.weights
    psi = g.psi
    gamma = g.gamma
    k = g.n_outcomes
    best = 0.0
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            total = math.fsum(
                float(P[w]) * (float(d[gamma[w], x]) * abs(float(psi[w, x]) - float(psi[w, y])))
                for w in range(k)
            )
            quot = total / float(d[x, y])
            if quot > best:
                best = quot
    return best


def weighted_tv_constant(p: RandomProjection) -> float:
    """Maximum over ordered pairs of the d(., x)-weighted variation quotient.

    sum over members m of d(m, x) * |rows[x](m) - rows[y](m)|, divided
    by d(x, y); dominates the dual-Lip quotient of projection_constant.
    """
    space = p.space
    n = space.n
    d = space.dist
    members = p.subset.members
    rows = p.rows
    best = 0.0
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            total = math.fsum(
                float(d[m, x]) * abs(rows[x][m] - rows[y][m])
                for m in members
            )
            quot = total / float(d[x, y])
            if quot > best:
                best = quot
    return best


def projection_constant(p: RandomProjection, tol: float = 1e-9) -> float:
    """Least K with dual-Lip distance between rows at most K*d(x, y).

    Evaluated as the max over unordered pairs of kr_norm of the row
    difference, divided by the point distance.
    """
    space = p.space
    n = space.n
    best = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            diff = p.rows[x] - p.rows[y]
            if not diff.support:
                continue
            value = kr_norm(diff, tol=tol).value / float(space.dist[x, y])
            if value > best:
                best = value
    return best


# ---------------------------------------------------------------------------
# conversions


def gentle_to_projection(g: GentlePartition) -> RandomProjection:
    """Push the densities forward through the anchor map.

    rows[x](m) = sum of P(w)*psi(w, x) over outcomes anchored at m, for
    exterior x; member rows are set to their point masses directly.
    The result is strong, and its projection constant never exceeds the
    gentle constant.
    """
    space = g.space
    sub = g.subset
    members = sub.members
    k = g.n_outcomes
    P = g.weights
    psi = g.psi
    gamma = g.gamma
    member_set = set(members)
    rows: list[SignedMeasure] = []
    for x in range(space.n):
        if x in member_set:
            rows.append(SignedMeasure.dirac(space, x))
            continue
        coeff: dict[int, float] = {}
        for m in members:
            c = math.fsum(
                float(P[w]) * float(psi[w, x])
                for w in range(k) if gamma[w] == m
            )
            if c != 0.0:
                coeff[m] = c
        rows.append(SignedMeasure(space, coeff))
    return RandomProjection(sub, tuple(rows), strong=True)


def _dyadic_weights(k: int) -> np.ndarray:
    """k powers of two summing to exactly 1, largest first."""
    w = [1.0]
    while len(w) < k:
        w.sort(reverse=True)
        h = w.pop(0) / 2.0
        w.append(h)
        w.append(h)
    w.sort(reverse=True)
    return np.array(w)


def projection_to_gentle(p: RandomProjection) -> GentlePartition:
    """Express a strong projection as densities over its own subset.

    Omega is the member list, anchored by the identity; the weights are
    dyadic so that psi(m, x) = rows[x](m)/P(m) scales by exact powers
    of two.  Every column is encoded this way — member columns carry
    their own point mass rather than zeros — which makes the gentle
    constant of the result agree with weighted_tv_constant(p) term by
    term, and the round trip through gentle_to_projection reproduce the
    coefficients bit for bit.
    """
    if not p.strong:
        raise ContractError("only strong projections admit a density form here")
    space = p.space
    sub = p.subset
    members = sub.members
    k = len(members)
    P = _dyadic_weights(k)
    psi = np.zeros((k, space.n))
    for x in range(space.n):
        row = p.rows[x]
        for i, m in enumerate(members):
            c = row[m]
            if c != 0.0:
                psi[i, x] = c / float(P[i])
    return GentlePartition(sub, P, psi, tuple(members))


# ---------------------------------------------------------------------------
# explicit construction for separated subsets


def uniform_discrete_projection(space: FiniteMetricSpace, subset: Subspace,
                                eps: float, t0: int,
                                tol: float = 1e-9) -> RandomProjection:
    """Two-atom rows for an eps-separated subset.

    A point within eps/2 of some member t splits its mass between the
    reference member t0 and t, in proportion (2/eps)*[d(x,t) at t0,
    eps/2 - d(x,t) at t]; points near no member map entirely to t0.
    The projection constant is bounded by 2*max(D, eps)/eps where D is
    the subset diameter.
    """
    if subset.parent != space:
        raise ContractError("subset belongs to a different space")
    if not (math.isfinite(eps) and eps > 0):
        raise ContractError("eps must be a positive real")
    members = subset.members
    if t0 not in members:
        raise ContractError(f"reference point {t0} is not a subset member")
    d = space.dist
    scale = max(eps, 1.0)
    for a in members:
        for b in members:
            if a < b and float(d[a, b]) < eps - tol * scale:
                raise ContractError(
                    f"subset is not {eps!r}-separated: d({space.labels[a]!r}, "
                    f"{space.labels[b]!r}) = {float(d[a, b])!r}"
                )
    member_set = set(members)
    half = eps / 2.0
    rows: list[SignedMeasure] = []
    for x in range(space.n):
        if x in member_set:
            rows.append(SignedMeasure.dirac(space, x))
            continue
        # nearest member strictly inside its eps/2 ball, if any (ties: lowest index)
        best_t = -1
        best_d = half
        for t in members:
            dxt = float(d[x, t])
            if dxt < best_d:
                best_t, best_d = t, dxt
        if best_t < 0 or best_t == t0:
            rows.append(SignedMeasure.dirac(space, t0))
            continue
        c0 = (2.0 / eps) * best_d
        ct = 1.0 - c0   # equals (2/eps)*(eps/2 - d) and keeps the mass at exactly 1
        coeff = {t0: c0, best_t: ct}
        rows.append(SignedMeasure(space, coeff))
    return RandomProjection(subset, tuple(rows), strong=True)


def uniform_discrete_bound(space: FiniteMetricSpace, subset: Subspace, eps: float) -> float:
    """The 2*max(D, eps)/eps guarantee for the two-atom construction."""
    if not (math.isfinite(eps) and eps > 0):
        raise ContractError("eps must be a positive real")
    members = subset.members
    diam = 0.0
    for a in members:
        for b in members:
            if a < b:
                diam = max(diam, float(space.dist[a, b]))
    return 2.0 * max(diam, eps) / eps


# ---------------------------------------------------------------------------
# minimal-K synthesis


@dataclass(frozen=True)
class SynthesisResult:
    k_star: float
    projection: RandomProjection


def synthesize_min_k(space: FiniteMetricSpace, subset: Subspace,
                     mode: str = "strong", tol: float = 1e-9,
                     config: SolverConfig | None = None) -> SynthesisResult:
    """Minimize K over all projections onto the subset, by one joint LP.

    Variables: K, one coefficient per (exterior point, member), and one
    transport-flow block per pair of points not both inside the subset.
    Each block certifies that moving rows[x] onto rows[y] costs at most
    K*d(x, y); the basepoint's balance row is dropped, which lets its
    coefficient float exactly as the dual-Lip pairing allows.  Member
    pairs reduce to the single row K >= 1.  Strong mode keeps the
    coefficients nonnegative; signed mode frees them but still pins
    each row's total mass to 1, the canonical representative since the
    pairing cannot see the basepoint component.
    """
    if mode not in ("strong", "signed"):
        raise ContractError(f"mode must be 'strong' or 'signed', got {mode!r}")
    if subset.parent != space:
        raise ContractError("subset belongs to a different space")
    n = space.n
    members = subset.members
    member_set = set(members)
    exterior = tuple(x for x in range(n) if x not in member_set)
    d = space.dist
    bp = space.basepoint

    if not exterior:
        rows = tuple(SignedMeasure.dirac(space, x) for x in range(n))
        k_star = 1.0 if n >= 2 else 0.0
        return SynthesisResult(k_star, RandomProjection(subset, rows, strong=True))
    if len(members) == 1:
        rows = tuple(SignedMeasure.dirac(space, bp) for _ in range(n))
        return SynthesisResult(0.0, RandomProjection(subset, rows, strong=True))

    m = len(members)
    arcs = [(a, b) for a in members for b in members if a != b]
    n_arcs = len(arcs)
    pairs = [
        (i, j)
        for i in range(n) for j in range(i + 1, n)
        if not (i in member_set and j in member_set)
    ]
    ext_index = {x: k for k, x in enumerate(exterior)}
    mem_pos = {mm: k for k, mm in enumerate(members)}

    def rvar(x: int, mm: int) -> int:
        return 1 + ext_index[x] * m + mem_pos[mm]

    n_vars = 1 + len(exterior) * m + len(pairs) * n_arcs

    rows_A: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []

    def new_row() -> np.ndarray:
        row = np.zeros(n_vars)
        rows_A.append(row)
        return row

    # each exterior row carries total mass 1
    for x in exterior:
        row = new_row()
        for mm in members:
            row[rvar(x, mm)] = 1.0
        senses.append("==")
        rhs.append(1.0)

    # pairs inside the subset force K >= 1
    row = new_row()
    row[0] = 1.0
    senses.append(">=")
    rhs.append(1.0)

    for p_idx, (i, j) in enumerate(pairs):
        base = 1 + len(exterior) * m + p_idx * n_arcs
        # balance at every member except the basepoint
        for mm in members:
            if mm == bp:
                continue
            row = new_row()
            for a_idx, (a, b) in enumerate(arcs):
                if a == mm:
                    row[base + a_idx] += 1.0
                if b == mm:
                    row[base + a_idx] -= 1.0
            const = 0.0
            if i in member_set:
                const += 1.0 if i == mm else 0.0
            else:
                row[rvar(i, mm)] -= 1.0
            if j in member_set:
                const -= 1.0 if j == mm else 0.0
            else:
                row[rvar(j, mm)] += 1.0
            senses.append("==")
            rhs.append(const)
        # total transport cost within K*d(i, j)
        row = new_row()
        for a_idx, (a, b) in enumerate(arcs):
            row[base + a_idx] = float(d[a, b])
        row[0] = -float(d[i, j])
        senses.append("<=")
        rhs.append(0.0)

    lb = np.zeros(n_vars)
    if mode == "signed":
        for x in exterior:
            for mm in members:
                lb[rvar(x, mm)] = -np.inf
    c = np.zeros(n_vars)
    c[0] = 1.0
    lp = LinearProgram(c=c, A=np.array(rows_A), senses=tuple(senses),
                       b=np.array(rhs), lb=lb)
    res = solve_lp(lp, tol=tol, config=config)
    if res.status != "optimal":
        raise SolverError(
            f"synthesis LP ended {res.status} on |X|={n}, |M|={m}, mode={mode}"
        )

    proj_rows: list[SignedMeasure] = []
    for x in range(n):
        if x in member_set:
            proj_rows.append(SignedMeasure.dirac(space, x))
            continue
        coeff: dict[int, float] = {}
        for mm in members:
            v = float(res.x[rvar(x, mm)])
            if mode == "strong" and -1e-11 <= v < 0.0:
                v = 0.0
            if v != 0.0:
                coeff[mm] = v
        proj_rows.append(SignedMeasure(space, coeff))
    projection = RandomProjection(subset, tuple(proj_rows), strong=(mode == "strong"))
    return SynthesisResult(float(res.x[0]), projection)


# ---------------------------------------------------------------------------
# asymptotic subset growth


@dataclass(frozen=True)
class ProfileEntry:
    size: int
    members: tuple[int, ...]
    k_star: float
    deviations: dict[int, float]


def asymptotic_profile(space: FiniteMetricSpace,
                       order: Sequence[int] | None = None,
                       tol: float = 1e-9,
                       config: SolverConfig | None = None) -> list[ProfileEntry]:
    """Synthesize minimal strong projections along a growing chain of subsets.

    order is a permutation of the points starting at the basepoint; the
    k-th subset consists of its first k entries.  Each entry reports
    the minimal K and, per point, the dual-Lip distance between its row
    and its own point mass — identically zero once the point joins the
    subset, and zero everywhere at full size.
    """
    n = space.n
    if order is None:
        order = [space.basepoint] + [x for x in range(n) if x != space.basepoint]
    order = [int(x) for x in order]
    if sorted(order) != list(range(n)):
        raise ContractError("order must be a permutation of all point indices")
    if order[0] != space.basepoint:
        raise ContractError("order must start at the basepoint")
    entries: list[ProfileEntry] = []
    for k in range(1, n + 1):
        members = tuple(sorted(order[:k]))
        sub = Subspace(space, members)
        res = synthesize_min_k(space, sub, "strong", tol=tol, config=config)
        deviations: dict[int, float] = {}
        for x in range(n):
            diff = res.projection.rows[x] - SignedMeasure.dirac(space, x)
            deviations[x] = kr_norm(diff, tol=tol).value if diff.support else 0.0
        entries.append(ProfileEntry(k, members, res.k_star, deviations))
    return entries


# ---------------------------------------------------------------------------
# water-filling retraction onto the nonnegative l1 ball


def retract_l1_ball(y: Sequence[float] | np.ndarray) -> tuple[float, np.ndarray]:
    """Shift a nonnegative vector down uniformly until its positive part fits.

    Returns (g, r) with g the least t >= 0 such that sum_i (y_i - t)+
    is at most 1, found by the descending breakpoint scan, and
    r = (y - g*e)+.  Vectors already in the ball come back unchanged
    with g = 0.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ContractError("expected a flat vector")
    if y.size and not np.all(np.isfinite(y)):
        raise ContractError("entries must be finite")
    neg = np.nonzero(y < 0.0)[0]
    if neg.size:
        i = int(neg[0])
        raise ContractError(f"entry {i} is negative ({y[i]!r}); the domain is y >= 0")
    if math.fsum(float(v) for v in y) <= 1.0:
        return 0.0, y.copy()
    s = np.sort(y)[::-1]
    css = np.cumsum(s)
    ks = np.arange(1, y.size + 1, dtype=float)
    ts = (css - 1.0) / ks
    hit = np.nonzero(s > ts)[0]
    g = float(ts[hit[-1]])
    g = max(g, 0.0)
    return g, np.maximum(y - g, 0.0)
