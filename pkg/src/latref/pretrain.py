"""Population pre-training of fixed QAOA angles, with scaling-fit selection.

Each epoch trains a handful of candidate schedules, one per fresh training
instance, all seeded from the best schedule known so far. Candidates are then
scored on held-out validation instances by fitting the decay exponent alpha
in q(n) = 1/2^(alpha n) to their best-solution probabilities; the smallest
alpha seen so far wins. Two reference schemes (angles from one shared random
training instance; fully per-instance optimization) are included for
comparison runs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .encoding import normalize_diagonal, prepare_refinement
from .lattice import (
    DEFAULT_C,
    DEFAULT_DELTA,
    PrimeLatticeInstance,
    build_prime_lattice,
    dimension_for_bits,
    sample_semiprime,
)
from .qaoa import (
    AngleSchedule,
    best_solution_probability,
    expectation,
    outcome_probabilities,
    refinement_probability,
    run_qaoa,
)
from .seeding import child_seed, substream


class OptimizationError(RuntimeError):
    """The simplex search hit a non-finite objective value."""


class InsufficientDataError(ValueError):
    """Not enough positive-probability points to fit a decay exponent."""


# ---------------------------------------------------------------------------
# Nelder-Mead


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    """Regular simplex around x0 with every coordinate perturbed.

    Axis-aligned steps are useless from the all-zeros start (a lone gamma or
    beta leaves the outcome distribution uniform), so each vertex moves in
    all coordinates at once.
    """
    d = x0.shape[0]
    p = (math.sqrt(d + 1) - 1 + d) / (d * math.sqrt(2))
    q = (math.sqrt(d + 1) - 1) / (d * math.sqrt(2))
    simplex = np.tile(x0, (d + 1, 1))
    for i in range(d):
        simplex[i + 1] += step * q
        simplex[i + 1, i] += step * (p - q)
    return simplex


def nelder_mead(
    objective,
    x0: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 400,
    step: float = 0.25,
) -> tuple[np.ndarray, float]:
    """Minimize with the classic simplex moves (1, 2, 0.5, 0.5).

    Stops when the value spread across the simplex drops below tol or after
    max_iter iterations. max_iter=0 returns (x0, f(x0)) untouched.
    """
    x0 = np.asarray(x0, dtype=float)

    def f(x: np.ndarray) -> float:
        val = float(objective(x))
        if not math.isfinite(val):
            raise OptimizationError(f"objective returned {val} at {x.tolist()}")
        return val

    f0 = f(x0)
    if max_iter <= 0:
        return x0.copy(), f0

    simplex = _initial_simplex(x0, step)
    values = np.array([f0] + [f(v) for v in simplex[1:]])

    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[-1] - values[0] < tol:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        reflected = centroid + (centroid - worst)
        f_r = f(reflected)
        if f_r < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
            continue
        if f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
            continue
        contracted = centroid + 0.5 * (worst - centroid)
        f_c = f(contracted)
        if f_c < values[-1]:
            simplex[-1], values[-1] = contracted, f_c
            continue
        # Shrink toward the best vertex.
        simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
        values[1:] = [f(v) for v in simplex[1:]]

    best = int(np.argmin(values))
    return simplex[best].copy(), float(values[best])


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class InstanceDistribution:
    """Uniform law over integer bit-lengths [m_lo, m_hi]."""

    m_lo: int
    m_hi: int

    def __post_init__(self) -> None:
        if not 4 <= self.m_lo <= self.m_hi:
            raise ValueError(f"need 4 <= m_lo <= m_hi, got [{self.m_lo}, {self.m_hi}]")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.m_lo, self.m_hi + 1))


@dataclass(frozen=True)
class TrainConfig:
    p: int = 1
    c: float = DEFAULT_C
    epochs: int = 5
    s_t: int = 4
    s_v: int = 12
    train_dist: InstanceDistribution = InstanceDistribution(8, 24)
    val_dist: InstanceDistribution = InstanceDistribution(16, 40)
    nm_tol: float = 1e-6
    nm_max_iter: int | None = None  # defaults to 400 per angle pair
    lll_delta: float = DEFAULT_DELTA
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 1 or self.epochs < 0 or self.s_t < 1 or self.s_v < 1:
            raise ValueError("counts must be positive (epochs may be zero)")

    @property
    def resolved_max_iter(self) -> int:
        return self.nm_max_iter if self.nm_max_iter is not None else 400 * 2 * self.p

    def config_hash(self) -> str:
        payload = repr(self).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Scaling fits


@dataclass(frozen=True)
class ScalingFit:
    """Through-the-origin fit of -log2 q against n, plus goodness of fit."""

    alpha: float
    r2: float
    points: tuple[tuple[float, float], ...]
    n_used: int
    n_zero: int


def fit_alpha(points, min_points: int = 2) -> ScalingFit:
    """Least-squares exponent for q(n) = 1/2^(alpha n).

    Points with q <= 0 cannot enter the log fit; they are excluded and
    counted. The model has no intercept, so alpha = sum(n y) / sum(n^2) with
    y = -log2 q.
    """
    pts = tuple((float(n), float(q)) for n, q in points)
    usable = [(n, q) for n, q in pts if q > 0.0]
    n_zero = len(pts) - len(usable)
    if len(usable) < min_points:
        raise InsufficientDataError(
            f"need >= {min_points} points with q > 0, got {len(usable)}"
        )
    x = np.array([n for n, _ in usable])
    y = np.array([-math.log2(q) for _, q in usable])
    alpha = float((x @ y) / (x @ x))
    ss_res = float(((y - alpha * x) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= 1e-12 else float("-inf")
    return ScalingFit(alpha=alpha, r2=r2, points=pts, n_used=len(usable), n_zero=n_zero)


# ---------------------------------------------------------------------------
# Training and validation


def _draw_instance(dist: InstanceDistribution, c: float, rng: np.random.Generator) -> PrimeLatticeInstance:
    m = dist.sample(rng)
    N = sample_semiprime(m, rng)
    return build_prime_lattice(N, dimension_for_bits(m), c, child_seed(rng))


def train_angles_on_instance(
    instance: PrimeLatticeInstance, init: AngleSchedule, cfg: TrainConfig
) -> AngleSchedule:
    """Nelder-Mead descent of the normalized-energy expectation from init."""
    ref = prepare_refinement(instance, delta=cfg.lll_delta)
    diag = normalize_diagonal(ref.diagonal)

    def objective(x: np.ndarray) -> float:
        sched = AngleSchedule.from_vector(x)
        return expectation(run_qaoa(diag, sched), diag)

    best, _ = nelder_mead(
        objective, init.as_vector(), tol=cfg.nm_tol, max_iter=cfg.resolved_max_iter
    )
    return AngleSchedule.from_vector(best)


def _validation_samples(
    angles: AngleSchedule, cfg: TrainConfig, rng: np.random.Generator
) -> list[tuple[int, float, float, bool]]:
    """Per-instance (n, best-solution prob, refinement prob, omitted) draws."""
    out = []
    for _ in range(cfg.s_v):
        inst = _draw_instance(cfg.val_dist, cfg.c, rng)
        ref = prepare_refinement(inst, delta=cfg.lll_delta)
        probs = outcome_probabilities(run_qaoa(normalize_diagonal(ref.diagonal), angles))
        out.append(
            (
                inst.n,
                best_solution_probability(probs, ref.diagonal),
                refinement_probability(probs, ref.diagonal),
                ref.omitted,
            )
        )
    return out


def validate_angles(
    angles: AngleSchedule, cfg: TrainConfig, rng: np.random.Generator
) -> ScalingFit:
    """Fit the decay of the best-solution probability on fresh instances.

    Validation scores the probability of sampling the neighbourhood optimum,
    which stays well-defined even when the Babai point is already optimal.
    """
    samples = _validation_samples(angles, cfg, rng)
    return fit_alpha([(n, pstar) for n, pstar, _, _ in samples], min_points=1)


def _refinement_fit_or_nan(samples) -> float:
    # Baseline-already-optimal cases carry no refinement signal; skip them.
    pts = [(n, q) for n, _, q, omitted in samples if not omitted]
    try:
        return fit_alpha(pts, min_points=1).alpha
    except InsufficientDataError:
        return float("nan")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    candidate: int
    alpha_pstar: float
    alpha_refine: float
    accepted: bool


def pretrain(cfg: TrainConfig) -> tuple[AngleSchedule, list[EpochRecord]]:
    """Population pre-training loop.

    Starts from the all-zeros schedule. Every epoch trains s_t candidates
    (each from the incumbent, on its own training instance) and validates
    each on s_v fresh instances; a candidate is accepted only if its
    validation alpha beats the best alpha seen so far, so the incumbent's
    score never regresses across the run.
    """
    incumbent = AngleSchedule.zeros(cfg.p)
    best_alpha = math.inf
    history: list[EpochRecord] = []
    for epoch in range(cfg.epochs):
        candidates = []
        for i in range(cfg.s_t):
            rng = substream(cfg.master_seed, epoch, 0, i)
            inst = _draw_instance(cfg.train_dist, cfg.c, rng)
            candidates.append(train_angles_on_instance(inst, incumbent, cfg))
        for i, cand in enumerate(candidates):
            rng = substream(cfg.master_seed, epoch, 1, i)
            samples = _validation_samples(cand, cfg, rng)
            try:
                alpha = fit_alpha(
                    [(n, pstar) for n, pstar, _, _ in samples], min_points=1
                ).alpha
            except InsufficientDataError:
                alpha = math.inf
            accepted = alpha < best_alpha
            if accepted:
                best_alpha = alpha
                incumbent = cand
            history.append(
                EpochRecord(
                    epoch=epoch,
                    candidate=i,
                    alpha_pstar=alpha,
                    alpha_refine=_refinement_fit_or_nan(samples),
                    accepted=accepted,
                )
            )
    return incumbent, history


def baseline_single_instance(
    m: int, cfg: TrainConfig, rng: np.random.Generator
) -> AngleSchedule:
    """Angles from a single random m-bit instance, trained from zeros."""
    N = sample_semiprime(m, rng)
    inst = build_prime_lattice(N, dimension_for_bits(m), cfg.c, child_seed(rng))
    return train_angles_on_instance(inst, AngleSchedule.zeros(cfg.p), cfg)


@dataclass(frozen=True)
class PerInstanceStats:
    expectation_uniform: float
    expectation_trained: float
    q_refine: float
    q_best: float
    babai_dist2: float
    best_dist2: float


def baseline_per_instance(
    instance: PrimeLatticeInstance, cfg: TrainConfig
) -> tuple[AngleSchedule, PerInstanceStats]:
    """Fully per-instance optimization from zeros (no angle transfer)."""
    ref = prepare_refinement(instance, delta=cfg.lll_delta)
    diag = normalize_diagonal(ref.diagonal)
    angles = train_angles_on_instance(instance, AngleSchedule.zeros(cfg.p), cfg)
    probs = outcome_probabilities(run_qaoa(diag, angles))
    uniform = float(diag.energies.mean())
    stats = PerInstanceStats(
        expectation_uniform=uniform,
        expectation_trained=float(probs @ diag.energies),
        q_refine=refinement_probability(probs, ref.diagonal),
        q_best=best_solution_probability(probs, ref.diagonal),
        babai_dist2=ref.babai.dist2,
        best_dist2=ref.diagonal.e_min,
    )
    return angles, stats


# ---------------------------------------------------------------------------
# Angle bank persistence


def angle_bank_text(
    angles: AngleSchedule, cfg: TrainConfig, history: list[EpochRecord]
) -> str:
    lines = [
        f"p {angles.p}",
        f"c {cfg.c!r}",
        f"config_hash {cfg.config_hash()}",
        f"seed {cfg.master_seed}",
        "gamma " + " ".join(repr(g) for g in angles.gamma.tolist()),
        "beta " + " ".join(repr(b) for b in angles.beta.tolist()),
    ]
    for rec in history:
        lines.append(
            f"history {rec.epoch} {rec.candidate} {rec.alpha_pstar!r} "
            f"{rec.alpha_refine!r} {int(rec.accepted)}"
        )
    return "\n".join(lines) + "\n"


def save_angle_bank(
    path, angles: AngleSchedule, cfg: TrainConfig, history: list[EpochRecord]
) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(angle_bank_text(angles, cfg, history))


def load_angle_bank(path) -> tuple[AngleSchedule, dict, list[EpochRecord]]:
    meta: dict = {}
    gamma = beta = None
    history: list[EpochRecord] = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            if key == "gamma":
                gamma = np.array([float(v) for v in rest.split()])
            elif key == "beta":
                beta = np.array([float(v) for v in rest.split()])
            elif key == "history":
                ep, cand, a_p, a_r, acc = rest.split()
                history.append(
                    EpochRecord(int(ep), int(cand), float(a_p), float(a_r), bool(int(acc)))
                )
            else:
                meta[key] = rest
    if gamma is None or beta is None:
        raise ValueError(f"angle bank {path} is missing gamma/beta lines")
    angles = AngleSchedule(gamma=gamma, beta=beta)
    if "p" in meta and int(meta["p"]) != angles.p:
        raise ValueError("angle bank header p disagrees with angle lines")
    return angles, meta, history
