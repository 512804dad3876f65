"""Finite pointed metric spaces and subset machinery.

A space is a finite list of labelled points, a dense symmetric distance
matrix, and a distinguished basepoint.  Admission of the matrix itself
is split in two: structural checks (square, finite, real) happen at
construction and raise immediately, while the metric axioms are checked
by ``validate_metric`` which returns a full violation report so callers
can inspect broken inputs instead of just rejecting them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, MalformedInputError


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space with a distinguished basepoint.

    labels: one string per point, unique.
    dist:   dense (n, n) matrix of pairwise distances.
    basepoint: index of the distinguished point.
    """

    labels: tuple[str, ...]
    dist: np.ndarray
    basepoint: int = 0

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) == 0:
            raise MalformedInputError("a metric space needs at least one point")
        if len(set(labels)) != len(labels):
            raise MalformedInputError("point labels must be unique")
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MalformedInputError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] != len(labels):
            raise MalformedInputError(
                f"distance matrix is {d.shape[0]}x{d.shape[0]} but there are {len(labels)} labels"
            )
        if not np.all(np.isfinite(d)):
            raise MalformedInputError("distance matrix contains non-finite entries")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if not (0 <= self.basepoint < len(labels)):
            raise MalformedInputError(f"basepoint index {self.basepoint} out of range")

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ContractError(f"unknown point label {label!r}") from None

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.basepoint == other.basepoint
            and np.array_equal(self.dist, other.dist)
        )

    __hash__ = None  # mutable ndarray payload; value equality only

    def __repr__(self) -> str:
        return (
            f"FiniteMetricSpace(n={self.n}, basepoint={self.labels[self.basepoint]!r})"
        )


@dataclass(frozen=True)
class Violation:
    """One broken metric axiom: which rule, which points, by how much."""

    kind: str           # "symmetry" | "diagonal" | "separation" | "nonnegative" | "triangle"
    indices: tuple[int, ...]
    excess: float

    def describe(self, space: FiniteMetricSpace) -> str:
        pts = ",".join(space.labels[i] for i in self.indices)
        return f"{self.kind} violated at ({pts}) by {self.excess:.3e}"


def validate_metric(space: FiniteMetricSpace, tol: float = 1e-9) -> list[Violation]:
    """Check the metric axioms and report every violation.

    The tolerance is relative to the largest distance in the matrix, so
    a matrix scaled by a constant yields the same report.  An empty
    report means the space is a metric space up to that tolerance.
    """
    d = space.dist
    n = space.n
    scale = float(d.max()) if n > 1 else 1.0
    eff = tol * max(scale, 1e-300)
    out: list[Violation] = []

    for i in range(n):
        if abs(d[i, i]) > eff:
            out.append(Violation("diagonal", (i,), float(abs(d[i, i]))))
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] < -eff:
                out.append(Violation("nonnegative", (i, j), float(-d[i, j])))
            gap = abs(d[i, j] - d[j, i])
            if gap > eff:
                out.append(Violation("symmetry", (i, j), float(gap)))
            if d[i, j] <= eff:
                out.append(Violation("separation", (i, j), float(abs(d[i, j]))))
    # triangle inequality; (i, j, k) and (k, j, i) state the same bound on a
    # symmetric matrix, so report each unordered endpoint pair once
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            through = d[i, j] + d[j, :]
            slack = d[i, :] - through
            for k in np.nonzero(slack > eff)[0]:
                if k != i and k != j and k > i:
                    out.append(Violation("triangle", (i, j, int(k)), float(slack[k])))
    return out


def require_valid_metric(space: FiniteMetricSpace, tol: float = 1e-9) -> None:
    """Raise a ContractError carrying the report when the space is broken."""
    report = validate_metric(space, tol)
    if report:
        lines = "; ".join(v.describe(space) for v in report[:8])
        more = "" if len(report) <= 8 else f" (+{len(report) - 8} more)"
        raise ContractError(f"not a metric space: {lines}{more}")


def restrict(space: FiniteMetricSpace, members: Sequence[int]) -> FiniteMetricSpace:
    """The induced metric on a subset of points, labels preserved.

    The subset must contain the basepoint, which stays the basepoint of
    the restriction.
    """
    mem = list(dict.fromkeys(int(m) for m in members))
    if len(mem) != len(list(members)):
        raise ContractError("subset members must be distinct")
    if not mem:
        raise ContractError("subset must be nonempty")
    for m in mem:
        if not (0 <= m < space.n):
            raise ContractError(f"subset member {m} out of range")
    if space.basepoint not in mem:
        raise ContractError("subset must contain the basepoint")
    mem = sorted(mem)
    labels = tuple(space.labels[m] for m in mem)
    sub = space.dist[np.ix_(mem, mem)]
    return FiniteMetricSpace(labels, sub, basepoint=mem.index(space.basepoint))


@dataclass(frozen=True)
class Subspace:
    """A subset of a parent space, kept as sorted parent indices.

    The basepoint always belongs to the subset; everything downstream
    that touches functions vanishing at the basepoint relies on it.
    """

    parent: FiniteMetricSpace
    members: tuple[int, ...]

    def __post_init__(self):
        mem = tuple(sorted(int(m) for m in self.members))
        if len(set(mem)) != len(mem):
            raise ContractError("subspace members must be distinct")
        if not mem:
            raise ContractError("subspace must be nonempty")
        for m in mem:
            if not (0 <= m < self.parent.n):
                raise ContractError(f"subspace member {m} out of range")
        if self.parent.basepoint not in mem:
            raise ContractError("subspace must contain the basepoint")
        object.__setattr__(self, "members", mem)

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, i: int) -> bool:
        return i in set(self.members)

    def complement(self) -> tuple[int, ...]:
        inside = set(self.members)
        return tuple(i for i in range(self.parent.n) if i not in inside)

    def to_space(self) -> FiniteMetricSpace:
        return restrict(self.parent, self.members)

    def local_index(self, parent_index: int) -> int:
        try:
            return self.members.index(parent_index)
        except ValueError:
            raise ContractError(
                f"point {self.parent.labels[parent_index]!r} is not in the subset"
            ) from None


def subspace_from_labels(space: FiniteMetricSpace, labels: Iterable[str]) -> Subspace:
    return Subspace(space, tuple(space.index(l) for l in labels))


def doubling_estimate(space: FiniteMetricSpace) -> int:
    """Greedy upper bound on the doubling constant of the space.

    For every center c and every radius r drawn from the pairwise
    distances, the ball B(c, r) is covered greedily by balls of radius
    r/2 centered at points of the space: repeatedly grab the uncovered
    point farthest from c (lowest index on ties) and cover around it.
    The reported value is the worst greedy count, which dominates the
    optimal cover count ball by ball, hence is an upper bound on the
    doubling constant restricted to point-centered balls.  Always >= 1.
    """
    d = space.dist
    n = space.n
    best = 1
    radii = sorted({float(d[i, j]) for i in range(n) for j in range(i + 1, n) if d[i, j] > 0})
    for c in range(n):
        for r in radii:
            ball = np.nonzero(d[c] <= r)[0]
            if len(ball) == 0:
                continue
            uncovered = set(int(p) for p in ball)
            count = 0
            while uncovered:
                far = max(uncovered, key=lambda p: (d[c, p], -p))
                count += 1
                uncovered = {q for q in uncovered if d[far, q] > r / 2.0}
            best = max(best, count)
    return best
