#!/usr/bin/env python3
"""Leave-one-out stability of the fitted leading coefficients.

Fits c1 + c0/sqrt(eps) to each bound series on the full sweep and on every
subset that drops one gap width.  A fit dominated by the asymptotic term
should move by well under a percent when any single point is removed; a
large swing flags that the sweep has not reached the scaling regime.

Reads sweep rows from a CSV produced by ``gapstress sweep`` (or computes
them from a config when --config is given instead).
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np


def _fit(eps: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    design = np.stack((1.0 / np.sqrt(eps), np.ones_like(eps)), axis=-1)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(coef[0]), float(coef[1])


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="sweep CSV to analyze")
    src.add_argument("--config", help="config to sweep before analyzing")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)

    if args.csv:
        with open(args.csv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        data = {
            (int(r["j"]), kind): np.array(
                [(float(r2["eps"]), float(r2[kind])) for r2 in rows if r2["j"] == r["j"]]
            )
            for r in rows
            for kind in ("upper", "lower")
        }
    else:
        from gapstress import parse_config, sweep_and_fit

        cfg = parse_config(args.config)
        swept, _ = sweep_and_fit(cfg, workers=args.workers)
        data = {
            (j, kind): np.array(
                [(r.eps, getattr(r, kind)) for r in swept if r.j == j]
            )
            for j in (1, 2)
            for kind in ("upper", "lower")
        }

    for (j, kind), series in sorted(data.items()):
        eps, vals = series[:, 0], series[:, 1]
        if eps.size < 4:
            print(f"j={j} {kind}: need at least 4 points for leave-one-out, have {eps.size}")
            continue
        c1_full, _ = _fit(eps, vals)
        swings = []
        for drop in range(eps.size):
            keep = np.arange(eps.size) != drop
            c1_sub, _ = _fit(eps[keep], vals[keep])
            swings.append((abs(c1_sub - c1_full) / abs(c1_full), eps[drop]))
        worst, at = max(swings)
        print(f"j={j} {kind:5s}: c1 = {c1_full:.6f}, "
              f"worst leave-one-out swing {100 * worst:.4f}% (dropping eps={at:g})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
