#!/usr/bin/env python3
"""Trace how the optimal projection constant decays along growing subsets.

Draws seeded random spaces, runs the nested-subset profile (basepoint
first, then one point at a time), and records the per-step optimal K
together with the greedy doubling estimate of the ambient space.  The
interesting quantity is the worst K seen along the profile: it stays
bounded while the space grows, and the doubling estimate is the natural
scale to compare it against.

    python3 scripts/asymptotic_experiment.py --min-points 4 --max-points 9 \
        --trials 3 --seed 7 --out profiles.csv
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from krext import FiniteMetricSpace, asymptotic_profile, doubling_estimate


@dataclass(frozen=True)
class ProfileConfig:
    min_points: int = 4
    max_points: int = 9
    trials: int = 3
    seed: int = 7
    out: str = "profiles.csv"

    def __post_init__(self):
        if not 2 <= self.min_points <= self.max_points:
            raise ValueError("need 2 <= min_points <= max_points")
        if self.trials < 1:
            raise ValueError("need at least one trial")


def random_space(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    while True:
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        off = d[~np.eye(n, dtype=bool)]
        if off.min() > 1e-3:
            return FiniteMetricSpace(
                tuple(f"p{i}" for i in range(n)), d,
                basepoint=int(rng.integers(n)),
            )


def run(cfg: ProfileConfig) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in range(cfg.min_points, cfg.max_points + 1):
        for trial in range(cfg.trials):
            space = random_space(rng, n)
            profile = asymptotic_profile(space)
            lam = doubling_estimate(space)
            for entry in profile:
                rows.append({
                    "n_points": n,
                    "trial": trial,
                    "subset_size": entry.size,
                    "k_star": entry.k_star,
                    "max_deviation": max(entry.deviations.values()),
                    "doubling_est": lam,
                })
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-points", type=int, default=4)
    ap.add_argument("--max-points", type=int, default=9)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="profiles.csv")
    args = ap.parse_args(argv)
    try:
        cfg = ProfileConfig(
            min_points=args.min_points, max_points=args.max_points,
            trials=args.trials, seed=args.seed, out=args.out,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rows = run(cfg)
    with open(cfg.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {cfg.out}")

    for n in range(cfg.min_points, cfg.max_points + 1):
        worst = max(r["k_star"] for r in rows if r["n_points"] == n)
        lam = max(r["doubling_est"] for r in rows if r["n_points"] == n)
        bars = "#" * int(round(20 * (worst - 1.0)))
        print(f"  n={n}: worst K {worst:.4f}  doubling <= {lam}  |{bars}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
