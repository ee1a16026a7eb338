#!/usr/bin/env python3
"""Fit and extrapolate the depth dependence of the decay exponent.

Reads the alpha_by_p.csv emitted by a scaling run, fits
alpha(p) = a exp(-b p) + c, and prints the extrapolated exponents at the
requested depths (optionally plotting the curve).

Example:
    python scripts/alpha_vs_depth.py out/scaling/alpha_by_p.csv --eval 10,20,30
"""

import argparse
from pathlib import Path

from latref.analysis import extrapolate_alpha_p


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="alpha_by_p.csv from a scaling run")
    ap.add_argument("--eval", default="10,20,30", help="depths to extrapolate to")
    ap.add_argument("--plot", help="optional SVG output path")
    args = ap.parse_args()

    points = []
    for line in Path(args.csv).read_text().splitlines()[1:]:
        fields = line.split(",")
        points.append((int(fields[0]), float(fields[1])))
    eval_at = tuple(float(tok) for tok in args.eval.split(","))

    fit, table = extrapolate_alpha_p(points, eval_at=eval_at)
    print(f"alpha(p) = {fit.a:.4f} * exp(-{fit.b:.4f} p) + {fit.c:.4f}"
          + ("  [degenerate: flat data]" if fit.degenerate else ""))
    print(f"max |residual| = {max(abs(r) for r in fit.residuals):.2e}")
    for p in eval_at:
        print(f"  alpha({p:g}) ~= {table[p]:.4f}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        xs = [p for p, _ in points]
        ys = [a for _, a in points]
        grid = [min(xs) + i * (max(eval_at + (max(xs),)) - min(xs)) / 200 for i in range(201)]
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.scatter(xs, ys, label="fitted exponents")
        ax.plot(grid, [fit.alpha_at(p) for p in grid], "r-", label="exp fit")
        ax.set_xlabel("depth p")
        ax.set_ylabel("alpha")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot)
        print(f"plot -> {args.plot}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
