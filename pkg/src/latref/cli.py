"""Command line front end: pretrain, scale, heatmap, factor, validate.

Configuration precedence for shared options: explicit flag, then the
LATREF_OUT environment variable (output directory only), then the
`key = value` config file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, checks, factoring
from .lattice import DEFAULT_C
from .pretrain import (
    InstanceDistribution,
    InsufficientDataError,
    TrainConfig,
    load_angle_bank,
    pretrain as run_pretrain,
    save_angle_bank,
)
from .qaoa import AngleSchedule

ENV_OUT = "LATREF_OUT"
_KNOWN_CONFIG_KEYS = {
    "seed", "out", "p", "c", "m_range", "instances", "workers", "bank",
    "epochs", "train_size", "val_size", "train_range", "val_range", "grid",
}


class ConfigError(ValueError):
    pass


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="ascii").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"malformed config line: {raw!r}")
        key = key.strip()
        if key not in _KNOWN_CONFIG_KEYS:
            raise ConfigError(f"unknown config key: {key}")
        values[key] = value.strip()
    return values


def parse_m_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ConfigError(f"m-range must look like lo:hi, got {text!r}")
    return int(lo), int(hi)


def parse_p_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(","))


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")
    sub.add_argument("--out", help="output directory (default ./out)")
    sub.add_argument("--p", help="depth or comma list of depths")
    sub.add_argument("--c", type=float, help=f"precision parameter (default {DEFAULT_C})")
    sub.add_argument("--m-range", help="bit-length range lo:hi")
    sub.add_argument("--instances", type=int, help="instances per lattice rank")
    sub.add_argument("--workers", type=int, help="parallel workers (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latref",
        description="Prime-lattice CVP refinement experiments with fixed-angle QAOA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pre = sub.add_parser("pretrain", help="train fixed angle banks")
    _common_flags(p_pre)
    p_pre.add_argument("--epochs", type=int)
    p_pre.add_argument("--train-size", type=int, help="candidates per epoch")
    p_pre.add_argument("--val-size", type=int, help="validation instances per candidate")
    p_pre.add_argument("--train-range", help="training bit-length range lo:hi")
    p_pre.add_argument("--val-range", help="validation bit-length range lo:hi")

    p_scale = sub.add_parser("scale", help="scaling sweep with fixed angles")
    _common_flags(p_scale)
    p_scale.add_argument("--bank", help="angle bank directory (default: out dir)")

    p_heat = sub.add_parser("heatmap", help="single-layer angle landscape")
    _common_flags(p_heat)
    p_heat.add_argument("--grid", type=int, help="grid resolution (default 50)")
    p_heat.add_argument("--m", type=int, default=8, help="instance bit-length (default 8)")
    p_heat.add_argument("--plot", action="store_true", help="also render an SVG")

    p_factor = sub.add_parser("factor", help="toy factoring demo")
    _common_flags(p_factor)
    p_factor.add_argument("--n", type=int, required=True, help="odd composite to factor")
    p_factor.add_argument("--bank", help="angle bank file to reuse")
    p_factor.add_argument("--budget", type=float, default=55.0, help="seconds per run")
    p_factor.add_argument(
        "--no-trivial-gcd",
        action="store_true",
        help="skip the small-prime shortcut and force the relation pipeline",
    )

    p_val = sub.add_parser("validate", help="run the property suite")
    _common_flags(p_val)
    p_val.add_argument("--quick", action="store_true", help="reduced counts")

    return parser


class _Options:
    """Flag > environment (out dir) > config file > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = parse_config_file(args.config) if args.config else {}

    def get(self, key: str, default=None, cast=lambda v: v):
        value = getattr(self.args, key.replace("-", "_"), None)
        if value is not None:
            return value
        if key in self.config:
            return cast(self.config[key])
        return default

    def out_dir(self) -> Path:
        flag = getattr(self.args, "out", None)
        chosen = flag or os.environ.get(ENV_OUT) or self.config.get("out") or "out"
        path = Path(chosen)
        path.mkdir(parents=True, exist_ok=True)
        return path


def _bank_path(directory: Path, p: int) -> Path:
    return directory / f"angles_p{p}.txt"


def cmd_pretrain(args) -> int:
    opt = _Options(args)
    out = opt.out_dir()
    seed = opt.get("seed", 0, int)
    c = opt.get("c", DEFAULT_C, float)
    depths = parse_p_list(str(opt.get("p", "1")))
    train_range = parse_m_range(opt.get("train_range", None, str) or opt.get("m_range", "8:24", str))
    val_range = parse_m_range(opt.get("val_range", "16:40", str))
    for p in depths:
        cfg = TrainConfig(
            p=p,
            c=c,
            epochs=opt.get("epochs", 5, int),
            s_t=opt.get("train_size", 4, int),
            s_v=opt.get("val_size", 12, int),
            train_dist=InstanceDistribution(*train_range),
            val_dist=InstanceDistribution(*val_range),
            master_seed=seed,
        )
        angles, history = run_pretrain(cfg)
        path = _bank_path(out, p)
        save_angle_bank(path, angles, cfg, history)
        accepted = [rec.alpha_pstar for rec in history if rec.accepted]
        best = min(accepted) if accepted else float("inf")
        print(f"p={p}: best validation alpha {best:.4f}, bank written to {path}")
    return 0


def cmd_scale(args) -> int:
    opt = _Options(args)
    out = opt.out_dir()
    bank_dir = Path(opt.get("bank", None, str) or out)
    depths = parse_p_list(str(opt.get("p", "1")))
    banks: dict[int, AngleSchedule] = {}
    for p in depths:
        path = _bank_path(bank_dir, p)
        if not path.exists():
            print(f"error: missing angle bank {path}", file=sys.stderr)
            return 1
        banks[p], _, _ = load_angle_bank(path)
    m_lo, m_hi = parse_m_range(opt.get("m_range", "8:32", str))
    cfg = analysis.ExperimentConfig(
        m_lo=m_lo,
        m_hi=m_hi,
        instances_per_n=opt.get("instances", 100, int),
        p_list=depths,
        c=opt.get("c", DEFAULT_C, float),
        master_seed=opt.get("seed", 0, int),
        workers=opt.get("workers", 1, int),
    )
    records = analysis.run_scaling_experiment(cfg, banks)
    csv_path = out / "records.csv"
    analysis.write_records_csv(csv_path, records)
    fit_lines = ["p,alpha,r2,n_used,n_zero"]
    for p in depths:
        pts = [(r.n_exact, r.q_refine) for r in records if r.p == p and not r.omitted]
        try:
            fit = analysis.fit_records([r for r in records if r.p == p])[p]
        except InsufficientDataError:
            print(f"p={p}: insufficient refinement data ({len(pts)} usable points)")
            continue
        fit_lines.append(f"{p},{fit.alpha!r},{fit.r2!r},{fit.n_used},{fit.n_zero}")
        print(f"p={p}: alpha={fit.alpha:.4f} (r2={fit.r2:.3f}, {fit.n_used} points)")
    (out / "alpha_by_p.csv").write_text("\n".join(fit_lines) + "\n", encoding="ascii")
    print(f"{len(records)} records written to {csv_path}")
    return 0


def cmd_heatmap(args) -> int:
    opt = _Options(args)
    out = opt.out_dir()
    seed = opt.get("seed", 0, int)
    inst = analysis.first_refinable_instance(seed, m=args.m, c=opt.get("c", DEFAULT_C, float))
    grid = opt.get("grid", 50, int)
    gammas, betas, matrix = analysis.heatmap_p1(inst, grid=grid)
    path = out / "heatmap.csv"
    path.write_text(analysis.heatmap_to_csv(gammas, betas, matrix), encoding="ascii")
    print(f"{grid}x{grid} heatmap written to {path}")
    if args.plot:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping plot", file=sys.stderr)
            return 0
        fig, ax = plt.subplots(figsize=(6, 4))
        mesh = ax.pcolormesh(gammas, betas, matrix, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="refinement probability")
        ax.set_xlabel("gamma")
        ax.set_ylabel("beta")
        svg = out / "heatmap.svg"
        fig.savefig(svg)
        print(f"plot written to {svg}")
    return 0


def cmd_factor(args) -> int:
    opt = _Options(args)
    angles = None
    if args.bank:
        angles, _, _ = load_angle_bank(args.bank)
    cfg = factoring.FactorConfig(
        c=opt.get("c", DEFAULT_C, float),
        angles=angles,
        time_budget_s=args.budget,
        check_trivial_gcd=not args.no_trivial_gcd,
        seed=opt.get("seed", 0, int),
    )
    try:
        outcome = factoring.factor_demo(args.n, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if outcome.factors is None:
        print(
            f"exhausted after {outcome.attempts} attempts "
            f"with {len(outcome.pairs)} relations collected",
            file=sys.stderr,
        )
        return 1
    p, q = outcome.factors
    print(f"{p} {q}")
    return 0


def cmd_validate(args) -> int:
    opt = _Options(args)
    results = checks.run_battery(quick=args.quick, seed=opt.get("seed", 2024, int))
    for result in results:
        print(result.line())
    return 0 if all(r.ok for r in results) else 1


_HANDLERS = {
    "pretrain": cmd_pretrain,
    "scale": cmd_scale,
    "heatmap": cmd_heatmap,
    "factor": cmd_factor,
    "validate": cmd_validate,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
