"""Self-contained property battery behind the `validate` CLI command.

Each check draws its own seeded instances, verifies the advertised
invariants at their stated tolerances, and reports one pass/fail line. The
acceptance test suite reuses these with its own counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (
    ExperimentConfig,
    first_refinable_instance,
    heatmap_p1,
    records_to_csv,
    run_scaling_experiment,
)
from .encoding import (
    CostDiagonal,
    build_diagonal,
    compute_kappa,
    cost,
    to_qubo_coefficients,
)
from .factoring import FactorConfig, factor_demo
from .intmath import int_det
from .lattice import (
    babai_nearest_plane,
    build_factor_base,
    build_prime_lattice,
    dimension_for_bits,
    exact_cvp_small,
    gram_schmidt,
    lll_reduce,
    sample_semiprime,
)
from .pretrain import fit_alpha
from .qaoa import AngleSchedule, dense_oracle, outcome_probabilities, run_qaoa
from .seeding import substream


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.detail}"


def _random_instance(rng, m_range=(8, 40), n_range=None, c=1.5):
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    N = sample_semiprime(m, rng)
    if n_range is None:
        n = dimension_for_bits(m)
    else:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
    return build_prime_lattice(N, n, c, int(rng.integers(0, 2**63 - 1)))


def check_simulator_oracle(draws: int = 100, seed: int = 2024) -> CheckResult:
    """Sweep-based circuit vs dense matrix products on random problems."""
    rng = substream(seed, 1)
    worst_dev = worst_norm = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, 5))
        p = int(rng.integers(0, 4))
        diag = CostDiagonal.from_energies(rng.random(1 << n))
        angles = AngleSchedule(gamma=rng.uniform(0, 2 * math.pi, p), beta=rng.uniform(0, math.pi, p))
        fast = run_qaoa(diag, angles)
        dense = dense_oracle(diag, angles)
        worst_dev = max(worst_dev, float(np.abs(fast - dense).max()))
        worst_norm = max(worst_norm, abs(float(np.abs(fast) @ np.abs(fast)) - 1.0))
    ok = worst_dev < 1e-9 and worst_norm < 1e-12
    return CheckResult(
        "simulator-oracle", ok, f"{draws} draws, max dev {worst_dev:.2e}, norm err {worst_norm:.2e}"
    )


def check_lll_properties(count: int = 500, seed: int = 2024) -> CheckResult:
    """Size-reduction, the exchange condition, and the unimodular witness."""
    rng = substream(seed, 2)
    bad = 0
    for _ in range(count):
        inst = _random_instance(rng, n_range=(3, 12))
        red = lll_reduce(inst.B, delta=0.75)
        gso = gram_schmidt(red.D)
        mu_ok = bool(np.all(np.abs(np.tril(gso.mu, -1)) <= 0.5 + 1e-9))
        lovasz_ok = all(
            0.75 * gso.norms[k - 1]
            <= gso.norms[k] + gso.mu[k, k - 1] ** 2 * gso.norms[k - 1] + 1e-9 * gso.norms[k - 1]
            for k in range(1, inst.n)
        )
        uni_ok = int_det(red.U.tolist()) in (1, -1)
        if not (mu_ok and lovasz_ok and uni_ok):
            bad += 1
    return CheckResult("lll-properties", bad == 0, f"{count} lattices, {bad} violations")


def check_babai_bound(count: int = 200, seed: int = 2024) -> CheckResult:
    """Nearest-plane distance within 2 (2/sqrt(3))^n of the true optimum."""
    rng = substream(seed, 3)
    bad = 0
    for _ in range(count):
        inst = _random_instance(rng, m_range=(8, 24), n_range=(3, 6))
        red = lll_reduce(inst.B)
        babai = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
        oracle = exact_cvp_small(red.D, inst.t)
        bound = 2.0 * (2.0 / math.sqrt(3.0)) ** inst.n
        if math.sqrt(babai.dist2) > bound * math.sqrt(oracle.dist2) * (1 + 1e-12):
            bad += 1
    return CheckResult("babai-bound", bad == 0, f"{count} instances, {bad} violations")


def check_qubo_consistency(count: int = 50, seed: int = 2024) -> CheckResult:
    """Gray-code diagonal == naive cost == coefficient expansion, exhaustively."""
    rng = substream(seed, 4)
    worst = 0.0
    for _ in range(count):
        inst = _random_instance(rng, m_range=(8, 32), n_range=(3, 10))
        red = lll_reduce(inst.B)
        babai = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
        diag = build_diagonal(inst, babai, red)
        qubo = to_qubo_coefficients(inst, babai, red)
        kappa = compute_kappa(babai.residuals)
        naive = np.array(
            [cost(z, inst.t, babai.b_op, kappa, red.D) for z in range(1 << inst.n)]
        )
        scale = max(float(np.abs(naive).max()), 1.0)
        worst = max(
            worst,
            float(np.abs(diag.energies - naive).max()) / scale,
            float(np.abs(qubo.evaluate_all() - naive).max()) / scale,
        )
    ok = worst < 1e-9
    return CheckResult("qubo-consistency", ok, f"{count} instances, worst rel dev {worst:.2e}")


def check_degenerate_uniform(seed: int = 2024) -> CheckResult:
    """Zero depth, zero mixing, or zero phases must leave the state uniform."""
    rng = substream(seed, 5)
    worst = 0.0
    for n in (1, 2, 3, 5):
        diag = CostDiagonal.from_energies(rng.random(1 << n))
        uniform = 2.0**-n
        cases = [
            AngleSchedule.zeros(0),
            AngleSchedule(gamma=rng.uniform(0, 2 * math.pi, 3), beta=np.zeros(3)),
            AngleSchedule(gamma=np.zeros(3), beta=rng.uniform(0, math.pi, 3)),
        ]
        for angles in cases:
            probs = outcome_probabilities(run_qaoa(diag, angles))
            worst = max(worst, float(np.abs(probs - uniform).max()))
    return CheckResult("degenerate-uniform", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_fit_recovery() -> CheckResult:
    """Exact synthetic decay data must recover its planted parameters."""
    ns = np.arange(3, 19)
    fit = fit_alpha([(n, 2.0 ** (-0.3 * n)) for n in ns])
    alpha_ok = abs(fit.alpha - 0.3) <= 1e-9

    from .analysis import extrapolate_alpha_p

    ps = np.arange(1, 11)
    pts = [(p, 0.4 * math.exp(-0.2 * p) + 0.1) for p in ps]
    curve, _ = extrapolate_alpha_p(pts)
    curve_ok = (
        abs(curve.a - 0.4) <= 1e-6 and abs(curve.b - 0.2) <= 1e-6 and abs(curve.c - 0.1) <= 1e-6
    )
    return CheckResult(
        "fit-recovery",
        alpha_ok and curve_ok,
        f"alpha err {abs(fit.alpha - 0.3):.1e}, curve errs "
        f"({abs(curve.a - 0.4):.1e}, {abs(curve.b - 0.2):.1e}, {abs(curve.c - 0.1):.1e})",
    )


def check_heatmap(grid: int = 50, seed: int = 2024) -> CheckResult:
    """Grid sweep sanity: probabilities in range, no-mixing row uniform."""
    inst = first_refinable_instance(seed)
    gammas, betas, matrix = heatmap_p1(inst, grid=grid)
    in_range = bool(np.all((matrix >= 0.0) & (matrix <= 1.0)))
    row0 = matrix[0]
    uniform_row = bool(np.all(np.abs(row0 - row0[0]) <= 1e-12))
    peak_ok = matrix.max() >= row0[0] - 1e-15
    structured = matrix.max() > 0.0
    return CheckResult(
        "heatmap",
        in_range and uniform_row and peak_ok and structured,
        f"{grid}x{grid} grid, values [{matrix.min():.3f}, {matrix.max():.3f}]",
    )


def check_scale_determinism(seed: int = 2024) -> CheckResult:
    """Identical CSV bytes for repeated runs and across worker counts."""
    banks = {1: AngleSchedule.zeros(1)}
    base = dict(m_lo=8, m_hi=16, instances_per_n=4, p_list=(1,), master_seed=seed)
    csv_a = records_to_csv(run_scaling_experiment(ExperimentConfig(**base, workers=1), banks))
    csv_b = records_to_csv(run_scaling_experiment(ExperimentConfig(**base, workers=1), banks))
    csv_c = records_to_csv(run_scaling_experiment(ExperimentConfig(**base, workers=2), banks))
    ok = csv_a == csv_b == csv_c
    return CheckResult("scale-determinism", ok, f"{len(csv_a.splitlines()) - 1} rows compared")


def check_factoring(numbers=(15, 21, 33, 35), seed: int = 2024) -> CheckResult:
    """Both the gcd short-circuit and the relation pipeline must split each N."""
    failures = []
    for N in numbers:
        quick = factor_demo(N, FactorConfig(seed=seed))
        if quick.factors is None or quick.factors[0] * quick.factors[1] != N:
            failures.append(f"{N} (quick)")
            continue
        full = factor_demo(N, FactorConfig(seed=seed, check_trivial_gcd=False))
        if full.factors is None or full.factors[0] * full.factors[1] != N:
            failures.append(f"{N} (relations)")
            continue
        fb = build_factor_base(dimension_for_bits(N.bit_length()))
        if not all(pair.verify(fb, N) for pair in full.pairs):
            failures.append(f"{N} (pair identity)")
    return CheckResult(
        "factoring", not failures, f"{len(numbers)} composites, failures: {failures or 'none'}"
    )


def run_battery(quick: bool = False, seed: int = 2024) -> list[CheckResult]:
    scale = 0.1 if quick else 1.0

    def k(full):
        return max(5, int(full * scale))

    return [
        check_simulator_oracle(draws=k(100), seed=seed),
        check_lll_properties(count=k(500), seed=seed),
        check_babai_bound(count=k(200), seed=seed),
        check_qubo_consistency(count=k(50), seed=seed),
        check_degenerate_uniform(seed=seed),
        check_fit_recovery(),
        check_heatmap(grid=10 if quick else 50, seed=seed),
        check_scale_determinism(seed=seed),
        check_factoring(seed=seed),
    ]
