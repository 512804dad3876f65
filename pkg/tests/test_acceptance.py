"""End-to-end acceptance gate: ten numbered checks at pinned tolerances.

Run with `pytest tests/test_acceptance.py -s -v` to see one PASS/FAIL line
per criterion.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np

from conftest import (
    rand_gentle,
    rand_measure,
    rand_repaired_space,
    rand_signed_projection,
    rand_space,
    rand_strong_projection,
    rand_subset_function,
    rand_subspace,
)
from krext import (
    FiniteMetricSpace,
    SignedMeasure,
    Subspace,
    asymptotic_profile,
    extend_by_projection,
    gentle_constant,
    gentle_to_projection,
    kr_norm,
    lip_norm,
    mcshane_extend,
    operator_norm,
    projection_constant,
    projection_to_gentle,
    retract_l1_ball,
    synthesize_min_k,
    uniform_discrete_projection,
    weighted_tv_constant,
)
from test_extension import _sandwich_competitor
from test_transport import dual_lp_value


@contextmanager
def criterion(num: int, text: str):
    try:
        yield
    except BaseException:
        print(f"\ncriterion {num:2d}: FAIL — {text}")
        raise
    print(f"\ncriterion {num:2d}: PASS — {text}")


def test_criterion_01_transport_value_matches_dense_lp():
    rng = np.random.default_rng(101)
    with criterion(1, "flow value == dense-LP dual on 200 random spaces, < 10 s"):
        start = time.perf_counter()
        for k in range(200):
            n = int(rng.integers(2, 11))
            space = rand_space(rng, n) if k % 2 else rand_repaired_space(rng, n)
            mu = rand_measure(rng, space)
            if not mu.support:
                mu = SignedMeasure.dirac(space, (space.basepoint + 1) % n)
            primal = kr_norm(mu)
            dual = dual_lp_value(mu)
            scale = max(1.0, abs(primal.value))
            assert abs(primal.value - dual) <= 1e-9 * scale
            assert primal.gap <= 1e-9 * scale
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_criterion_02_point_mass_differences_are_isometric():
    rng = np.random.default_rng(202)
    with criterion(2, "kr(delta_x - delta_y) == d(x,y) within 1e-9, all pairs"):
        for k in range(60):
            n = int(rng.integers(2, 9))
            space = rand_space(rng, n) if k % 2 else rand_repaired_space(rng, n)
            for x in range(n):
                for y in range(x + 1, n):
                    diff = SignedMeasure.dirac(space, x) - SignedMeasure.dirac(space, y)
                    assert abs(kr_norm(diff).value - space.d(x, y)) <= 1e-9


def test_criterion_03_tight_extension_birds_eye():
    rng = np.random.default_rng(303)
    with criterion(3, "tight extension: exact restriction, norm kept, maximal"):
        for _ in range(100):
            space = rand_space(rng, int(rng.integers(2, 8)))
            subset = rand_subspace(rng, space)
            f = rand_subset_function(rng, subset)
            L = lip_norm(f)
            out = mcshane_extend(subset, f)
            for j, m in enumerate(subset.members):
                assert out.values[m, 0] == f.values[j, 0]
            assert lip_norm(out) <= L + 1e-9
            for _ in range(50):
                comp = _sandwich_competitor(rng, space, subset, f, L)
                assert np.all(out.values[:, 0] >= comp - 1e-9)


def test_criterion_04_partition_bounds_its_projection():
    rng = np.random.default_rng(404)
    with criterion(4, "projection constant <= gentle constant + 1e-9, 100 runs"):
        for _ in range(100):
            space = rand_space(rng, int(rng.integers(2, 9)))
            subset = rand_subspace(rng, space, size=int(rng.integers(1, min(6, space.n) + 1)))
            k = int(rng.integers(subset.size, 9))
            g = rand_gentle(rng, subset, n_outcomes=k)
            assert g.psi.shape[0] <= 8 and space.n <= 8
            p = gentle_to_projection(g)
            assert projection_constant(p) <= gentle_constant(g) + 1e-9


def test_criterion_05_weighted_tv_dominates_and_encodes():
    rng = np.random.default_rng(505)
    with criterion(5, "wtv >= pc - 1e-9; encoding matches wtv; round trip exact"):
        for _ in range(100):
            space = rand_space(rng, int(rng.integers(2, 8)))
            subset = rand_subspace(rng, space)
            p = rand_strong_projection(rng, subset)
            wtv = weighted_tv_constant(p)
            assert wtv >= projection_constant(p) - 1e-9
            g = projection_to_gentle(p)
            assert abs(gentle_constant(g) - wtv) <= 1e-9
            back = gentle_to_projection(g)
            assert back.rows == p.rows


def _separated_instance(rng) -> tuple[FiniteMetricSpace, Subspace, float, int]:
    if rng.integers(2):
        coords = np.sort(rng.choice(np.arange(0.0, 60.0), size=7, replace=False))
        pts = coords[:, None]
    else:
        xs, ys = np.meshgrid(np.arange(3.0), np.arange(3.0))
        step = float(rng.uniform(2.0, 7.0))
        pts = np.column_stack([xs.ravel() * step, ys.ravel() * step])
    n = pts.shape[0]
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    space = FiniteMetricSpace(tuple(f"p{i}" for i in range(n)), d)
    diam = space.diameter
    eps = float(rng.uniform(0.25, 0.5)) * diam  # eps <= diam/2 keeps |M| >= 2
    members = [space.basepoint]
    for x in range(n):
        if all(space.d(x, m) >= eps for m in members):
            members.append(x)
    sub = Subspace(space, tuple(sorted(members)))
    t0 = members[int(rng.integers(len(members)))]
    return space, sub, eps, t0


def test_criterion_06_separated_subset_projection_bound():
    rng = np.random.default_rng(606)
    with criterion(6, "separated-subset projection stays under 2*D/eps + 1e-9"):
        for _ in range(50):
            space, sub, eps, t0 = _separated_instance(rng)
            assert sub.size >= 2 and space.diameter >= eps
            p = uniform_discrete_projection(space, sub, eps=eps, t0=t0)
            assert projection_constant(p) <= 2.0 * space.diameter / eps + 1e-9


def _two_member_oracle(space: FiniteMetricSpace, subset: Subspace) -> float:
    """Exact minimum for |M| = 2: per point, balance the two member pulls."""
    a, b = subset.members
    best = 1.0  # the member pair itself always forces K >= 1
    for x in range(space.n):
        if x in (a, b):
            continue
        best = max(best, space.d(a, b) / (space.d(x, a) + space.d(x, b)))
    return best


def test_criterion_07_synthesis_matches_oracle():
    rng = np.random.default_rng(707)
    with criterion(7, "synthesized K matches |M|=2 oracle; signed <= strong; M=X -> 1"):
        space = FiniteMetricSpace(
            ("a", "b", "c"),
            np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]]),
        )
        sub = Subspace(space, (0, 1))
        res = synthesize_min_k(space, sub, mode="strong")
        # literal grid oracle on the canonical instance
        grid_best = math.inf
        for s in np.linspace(0.0, 1.0, 4001):
            worst = 1.0
            row = SignedMeasure(space, {0: 1.0 - float(s), 1: float(s)})
            for m in (0, 1):
                worst = max(worst, kr_norm(row - SignedMeasure.dirac(space, m)).value
                            / space.d(2, m))
            grid_best = min(grid_best, worst)
        assert abs(res.k_star - grid_best) <= 1e-6
        assert abs(res.k_star - _two_member_oracle(space, sub)) <= 1e-6

        for _ in range(20):
            sp = rand_space(rng, int(rng.integers(4, 7)))
            members = rand_subspace(rng, sp, size=2)
            strong = synthesize_min_k(sp, members, mode="strong")
            signed = synthesize_min_k(sp, members, mode="signed")
            assert abs(strong.k_star - _two_member_oracle(sp, members)) <= 1e-6
            assert signed.k_star <= strong.k_star + 1e-9

        for n in (2, 4, 6):
            sp = rand_space(rng, n)
            full = synthesize_min_k(sp, Subspace(sp, tuple(range(n))))
            assert full.k_star == 1.0


def test_criterion_08_extension_operator_bound():
    rng = np.random.default_rng(808)
    with criterion(8, "lip(Tf) <= pc * lip(f) + 1e-9; operator norm == pc"):
        for k in range(100):
            space = rand_space(rng, int(rng.integers(2, 7)))
            subset = rand_subspace(rng, space)
            maker = rand_strong_projection if k % 2 else rand_signed_projection
            p = maker(rng, subset)
            dim = int(rng.integers(1, 3))
            norm = "abs" if dim == 1 else ("euclid" if k % 4 < 2 else "sup")
            f = rand_subset_function(rng, subset, dim=dim, norm=norm, zero_at_base=True)
            pc = projection_constant(p)
            out = extend_by_projection(p, f)
            assert lip_norm(out) <= pc * lip_norm(f) + 1e-9
            if k % 5 == 0:
                assert abs(operator_norm(p) - pc) <= 1e-9


def test_criterion_09_retraction_contracts():
    rng = np.random.default_rng(909)
    with criterion(9, "shift is sup-norm contractive; output mass <= 1; ball fixed"):
        worst_full = 0.0
        pairs = 0
        for k in range(5000):
            m = int(rng.integers(1, 11))
            y = rng.uniform(0.0, 2.5, size=m)
            if k % 3 == 0:
                z = np.clip(y + rng.uniform(-0.2, 0.2, size=m), 0.0, None)
            else:
                z = rng.uniform(0.0, 2.5, size=m)
            gy, ry = retract_l1_ball(y)
            gz, rz = retract_l1_ball(z)
            step = float(np.max(np.abs(y - z)))
            assert abs(gy - gz) <= step + 1e-12
            assert math.fsum(map(float, ry)) <= 1.0 + 1e-12
            assert math.fsum(map(float, rz)) <= 1.0 + 1e-12
            if step > 1e-12:
                worst_full = max(worst_full, float(np.max(np.abs(ry - rz))) / step)
                pairs += 1
            inside = y / (math.fsum(map(float, y)) + 1.0)
            gi, ri = retract_l1_ball(inside)
            assert gi == 0.0 and np.array_equal(ri, inside)
        verdict = "confirmed" if worst_full <= 1.0 + 1e-9 else "FLAGGED"
        print(f"\n    measured sup-norm Lipschitz constant of the retraction over "
              f"{pairs} pairs: {worst_full:.12f} ({verdict})")


def test_criterion_10_profile_of_an_eight_point_space():
    rng = np.random.default_rng(1010)
    with criterion(10, "8-point profile: ends at K=1 with zero deviations, < 60 s"):
        start = time.perf_counter()
        space = rand_space(rng, 8)
        profile = asymptotic_profile(space)
        last = profile[-1]
        assert last.size == 8 and last.k_star == 1.0
        assert all(v == 0.0 for v in last.deviations.values())
        for entry in profile:
            for m in entry.members:
                assert entry.deviations[m] == 0.0
            redo = synthesize_min_k(space, Subspace(space, entry.members), mode="strong")
            assert abs(entry.k_star - redo.k_star) <= 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.2f}s"
