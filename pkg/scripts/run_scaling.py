#!/usr/bin/env python3
"""End-to-end scaling study at desk scale.

Pre-trains one fixed-angle bank per requested depth, sweeps instances over a
bit-length range, fits the decay exponent alpha per depth, and writes
records.csv / alpha_by_p.csv (optionally a scatter+fit plot) into --out.

Example:
    python scripts/run_scaling.py --out out/scaling --p-list 1,2,3,5 \
        --m-range 8:64 --instances 150 --seed 2024 --plot
"""

import argparse
import math
from pathlib import Path

from latref.analysis import (
    ExperimentConfig,
    fit_records,
    run_scaling_experiment,
    write_records_csv,
)
from latref.pretrain import TrainConfig, pretrain, save_angle_bank


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/scaling")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--p-list", default="1,2,3,5")
    ap.add_argument("--m-range", default="8:64")
    ap.add_argument("--instances", type=int, default=150)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--train-size", type=int, default=3)
    ap.add_argument("--val-size", type=int, default=8)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    depths = tuple(int(tok) for tok in args.p_list.split(","))
    m_lo, m_hi = (int(tok) for tok in args.m_range.split(":"))

    banks = {}
    for p in depths:
        cfg = TrainConfig(
            p=p,
            epochs=args.epochs,
            s_t=args.train_size,
            s_v=args.val_size,
            master_seed=args.seed,
        )
        banks[p], history = pretrain(cfg)
        save_angle_bank(out / f"angles_p{p}.txt", banks[p], cfg, history)
        print(f"trained p={p} ({sum(h.accepted for h in history)} accepted candidates)")

    ecfg = ExperimentConfig(
        m_lo=m_lo,
        m_hi=m_hi,
        instances_per_n=args.instances,
        p_list=depths,
        master_seed=args.seed,
        workers=args.workers,
    )
    records = run_scaling_experiment(ecfg, banks)
    write_records_csv(out / "records.csv", records)
    fits = fit_records(records)

    lines = ["p,alpha,r2,n_used,n_zero"]
    for p in depths:
        fit = fits[p]
        lines.append(f"{p},{fit.alpha!r},{fit.r2!r},{fit.n_used},{fit.n_zero}")
        print(f"p={p}: alpha={fit.alpha:.4f} (r2={fit.r2:.3f}, {fit.n_used} points)")
    (out / "alpha_by_p.csv").write_text("\n".join(lines) + "\n")
    print(f"{len(records)} records -> {out/'records.csv'}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, len(depths), figsize=(4 * len(depths), 3.2), sharey=True)
        for ax, p in zip(axes if len(depths) > 1 else [axes], depths):
            pts = [(r.n_exact, r.q_refine) for r in records if r.p == p and not r.omitted]
            xs = [x for x, _ in pts]
            ys = [y for _, y in pts]
            ax.scatter(xs, ys, s=6, alpha=0.35)
            grid = [min(xs) + i * (max(xs) - min(xs)) / 100 for i in range(101)]
            ax.plot(grid, [2 ** (-fits[p].alpha * x) for x in grid], "r-",
                    label=f"alpha={fits[p].alpha:.3f}")
            ax.set_yscale("log")
            ax.set_xlabel("exact dimension")
            ax.set_title(f"p = {p}")
            ax.legend()
        axes0 = axes[0] if len(depths) > 1 else axes
        axes0.set_ylabel("refinement probability")
        fig.tight_layout()
        fig.savefig(out / "scaling.svg")
        print(f"plot -> {out/'scaling.svg'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
