#!/usr/bin/env python3
"""Compare angle-selection schemes on a common validation sweep.

Three schemes score the same validation draws:
  population : the epoch/validation pre-training loop
  single     : angles from one random instance of a chosen bit-length
  zeros      : untrained angles (uniform sampling baseline)

The per-instance optimum (training each validation instance from scratch) is
also reported as the no-transfer reference. Differences are stochastic at
desk scale; treat the output as indicative, not conclusive.
"""

import argparse

from latref.pretrain import (
    TrainConfig,
    baseline_per_instance,
    baseline_single_instance,
    fit_alpha,
    pretrain,
    validate_angles,
)
from latref.qaoa import AngleSchedule
from latref.seeding import substream


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--single-m", type=int, default=16,
                    help="bit-length of the lone training instance")
    ap.add_argument("--val-size", type=int, default=24)
    args = ap.parse_args()

    cfg = TrainConfig(p=args.p, epochs=args.epochs, s_t=3, s_v=args.val_size,
                      master_seed=args.seed)

    population, _ = pretrain(cfg)
    single = baseline_single_instance(args.single_m, cfg, substream(args.seed, 500))
    schemes = {
        "population": population,
        f"single (m={args.single_m})": single,
        "zeros": AngleSchedule.zeros(args.p),
    }
    for name, angles in schemes.items():
        fit = validate_angles(angles, cfg, substream(args.seed, 600))
        print(f"{name:>16}: validation alpha {fit.alpha:.4f} (r2 {fit.r2:.3f})")

    # no-transfer reference: optimize each validation instance independently
    from latref.pretrain import _draw_instance

    rng = substream(args.seed, 600)
    points = []
    for _ in range(args.val_size):
        inst = _draw_instance(cfg.val_dist, cfg.c, rng)
        _, stats = baseline_per_instance(inst, cfg)
        points.append((inst.n, stats.q_best))
    fit = fit_alpha(points, min_points=1)
    print(f"{'per-instance':>16}: validation alpha {fit.alpha:.4f} (r2 {fit.r2:.3f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
