"""Smooth-relation collection and parity post-processing for toy factoring.

Refined lattice vectors translate into integer pairs (u, v) with u smooth
over the prime base; whenever u - vN is smooth too, the pair contributes a
parity row. Combinations of rows summing to zero mod 2 yield a congruence of
squares and, usually, a factor split via gcd.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .encoding import normalize_diagonal, prepare_refinement
from .lattice import (
    DEFAULT_C,
    DEFAULT_DELTA,
    FactorBase,
    InvalidInstanceError,
    build_factor_base,
    build_prime_lattice,
    dimension_for_bits,
    is_prime,
)
from .qaoa import AngleSchedule, outcome_probabilities, run_qaoa
from .seeding import substream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SrPair:
    """A smooth relation pair: u and u - vN both factor over the base.

    e holds the exponents of u over p_1..p_n; e_prime holds the exponents of
    u - vN over p_0..p_n, where slot 0 is the sign exponent for p_0 = -1.
    """

    u: int
    v: int
    e: tuple[int, ...]
    e_prime: tuple[int, ...]

    def parity_row(self) -> tuple[int, ...]:
        padded = (0,) + self.e
        return tuple((ep - e) % 2 for ep, e in zip(self.e_prime, padded))

    def verify(self, base: FactorBase, N: int) -> bool:
        u = math.prod(p**e for p, e in zip(base.primes, self.e))
        diff = (-1) ** self.e_prime[0] * math.prod(
            p**e for p, e in zip(base.primes, self.e_prime[1:])
        )
        return u == self.u and self.u - self.v * N == diff


def smooth_factor(x: int, base: FactorBase) -> tuple[int, ...] | None:
    """Trial-divide x over the base; None when a cofactor survives.

    The returned vector covers p_0..p_n with the sign exponent in slot 0.
    """
    if x == 0:
        raise ValueError("zero has no smooth factorization")
    exps = [1 if x < 0 else 0]
    rest = abs(x)
    for p in base.primes:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        exps.append(e)
    if rest != 1:
        return None
    return tuple(exps)


def vector_to_uv(e, base: FactorBase) -> tuple[int, int]:
    """Split signed exponents into coprime (u, v): positives go to u,
    negated negatives to v."""
    u = v = 1
    for p, exp in zip(base.primes, e):
        exp = int(exp)
        if exp >= 0:
            u *= p**exp
        else:
            v *= p**-exp
    return u, v


def epsilon_of(e, base: FactorBase, N: int) -> float:
    """Log-space miss |sum_j e_j ln p_j - ln N| of an exponent vector."""
    total = sum(int(exp) * math.log(p) for p, exp in zip(base.primes, e))
    return abs(total - math.log(N))


def check_sr_pair(u: int, v: int, N: int, base: FactorBase) -> SrPair | None:
    """Accept (u, v) iff u and u - vN != 0 are both smooth over the base."""
    if u < 1 or v < 1:
        raise ValueError("u and v must be positive")
    diff = u - v * N
    if diff == 0:
        return None
    eu = smooth_factor(u, base)
    if eu is None or eu[0] != 0:
        return None
    ed = smooth_factor(diff, base)
    if ed is None:
        return None
    return SrPair(u=u, v=v, e=eu[1:], e_prime=ed)


def gf2_nullspace(rows) -> list[np.ndarray]:
    """Basis of row combinations summing to zero mod 2.

    Gauss-Jordan elimination with an identity augment: rows that reduce to
    zero hand back, in the augment, exactly the selector that produced them.
    """
    A = np.array(rows, dtype=np.uint8) % 2
    if A.ndim != 2 or A.shape[0] < 1:
        raise ValueError("need at least one row")
    k = A.shape[0]
    aug = np.eye(k, dtype=np.uint8)
    r = 0
    for col in range(A.shape[1]):
        pivots = np.flatnonzero(A[r:, col]) + r
        if pivots.size == 0:
            continue
        pr = int(pivots[0])
        if pr != r:
            A[[r, pr]] = A[[pr, r]]
            aug[[r, pr]] = aug[[pr, r]]
        hits = np.flatnonzero(A[:, col])
        for i in hits:
            if i != r:
                A[i] ^= A[r]
                aug[i] ^= aug[r]
        r += 1
        if r == k:
            break
    return [aug[i].copy() for i in range(k) if not A[i].any()]


def extract_factors(
    selector, pairs: list[SrPair], N: int, base: FactorBase
) -> tuple[int, int] | None:
    """Turn a zero-parity combination of pairs into a factor split.

    Builds X = prod p_i^(half exponent sum) mod N; X*X = 1 mod N by
    construction, so X outside {1, N-1} splits N via gcd(X -+ 1, N).
    Returns None for the trivial square roots.
    """
    selected = [pair for pick, pair in zip(selector, pairs) if pick]
    if not selected:
        return None
    width = len(base.primes) + 1
    sums = [0] * width
    for pair in selected:
        padded = (0,) + pair.e
        for i in range(width):
            sums[i] += pair.e_prime[i] - padded[i]
    if any(s % 2 for s in sums):
        raise ValueError("selector does not cancel parities")
    x = 1
    for i, s in enumerate(sums):
        half = s // 2
        if half == 0:
            continue
        p = base.prime(i)
        try:
            x = x * pow(p, half, N) % N
        except ValueError:
            # p shares a factor with N: that gcd is already a win.
            g = math.gcd(p, N)
            return (g, N // g) if g < N // g else (N // g, g)
    if x % N in (1, N - 1):
        return None
    g = math.gcd(x - 1, N)
    if 1 < g < N:
        return (g, N // g) if g < N // g else (N // g, g)
    g = math.gcd(x + 1, N)
    if 1 < g < N:
        return (g, N // g) if g < N // g else (N // g, g)
    return None


# ---------------------------------------------------------------------------
# Relation persistence: one `u v e... | e'...` line per pair, exact integers.


def relations_text(pairs: list[SrPair]) -> str:
    lines = []
    for pr in pairs:
        e = " ".join(str(x) for x in pr.e)
        ep = " ".join(str(x) for x in pr.e_prime)
        lines.append(f"{pr.u} {pr.v} {e} | {ep}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_relations(path, pairs: list[SrPair]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(relations_text(pairs))


def load_relations(path, base: FactorBase, N: int) -> list[SrPair]:
    pairs = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            left, _, right = line.partition("|")
            nums = [int(x) for x in left.split()]
            pair = SrPair(
                u=nums[0],
                v=nums[1],
                e=tuple(nums[2:]),
                e_prime=tuple(int(x) for x in right.split()),
            )
            if not pair.verify(base, N):
                raise ValueError(f"stored relation fails verification: {line}")
            pairs.append(pair)
    return pairs


# ---------------------------------------------------------------------------
# End-to-end demo loop


@dataclass(frozen=True)
class FactorConfig:
    n_base: int | None = None       # factor-base size; derived from N when None
    c: float = DEFAULT_C
    delta: float = DEFAULT_DELTA
    angles: AngleSchedule | None = None  # zeros(p=1) when None
    top_k: int = 16                 # measurement outcomes tried per instance
    max_exponent: int = 64          # skip candidates with wilder coefficients
    max_attempts: int = 400
    time_budget_s: float = 55.0
    check_trivial_gcd: bool = True
    seed: int = 0


@dataclass(frozen=True)
class FactorOutcome:
    factors: tuple[int, int] | None
    method: str                     # "trivial-gcd" | "relations" | "exhausted"
    pairs: list[SrPair] = field(default_factory=list)
    attempts: int = 0

    @property
    def exhausted(self) -> bool:
        return self.factors is None


def factor_demo(N: int, cfg: FactorConfig = FactorConfig()) -> FactorOutcome:
    """Collect smooth relations via lattice refinement until N splits.

    Each attempt draws a fresh diagonal permutation, reduces, runs the
    fixed-angle circuit, and converts the highest-probability neighbourhood
    outcomes back to original-basis exponent vectors through the unimodular
    witness. Relations accumulate across attempts; once n+1 distinct pairs
    exist, the parity system is solved and factors extracted.
    """
    if N <= 2 or N % 2 == 0:
        raise ValueError(f"N must be an odd composite > 2, got {N}")
    if is_prime(N):
        raise InvalidInstanceError(f"{N} is prime")
    n = cfg.n_base if cfg.n_base is not None else dimension_for_bits(N.bit_length())
    base = build_factor_base(n)

    if cfg.check_trivial_gcd:
        for p in base.primes:
            if N % p == 0:
                lo, hi = sorted((p, N // p))
                return FactorOutcome(factors=(lo, hi), method="trivial-gcd")

    angles = cfg.angles if cfg.angles is not None else AngleSchedule.zeros(1)
    pairs: dict[tuple[int, int], SrPair] = {}
    deadline = time.monotonic() + cfg.time_budget_s
    attempts = 0

    for attempt in range(cfg.max_attempts):
        if time.monotonic() > deadline:
            break
        attempts = attempt + 1
        rng = substream(cfg.seed, attempt)
        inst = build_prime_lattice(N, n, cfg.c, int(rng.integers(0, 2**63 - 1)))
        ref = prepare_refinement(inst, delta=cfg.delta)
        probs = outcome_probabilities(run_qaoa(normalize_diagonal(ref.diagonal), angles))
        order = np.argsort(-probs, kind="stable")[: cfg.top_k]

        u_mat = ref.reduced.U.tolist()
        for z in order:
            bits = (int(z) >> np.arange(n)) & 1
            y = (ref.babai.coeffs + ref.kappa * bits).tolist()
            e = [sum(u_mat[i][j] * y[j] for j in range(n)) for i in range(n)]
            if max(abs(x) for x in e) > cfg.max_exponent:
                continue
            u, v = vector_to_uv(e, base)
            if (u, v) in pairs:
                continue
            pair = check_sr_pair(u, v, N, base)
            if pair is None:
                continue
            log.debug("relation (%d, %d) with log miss %.3g", u, v, epsilon_of(e, base, N))
            pairs[(u, v)] = pair

        if len(pairs) >= n + 1:
            ordered = list(pairs.values())
            rows = [pr.parity_row() for pr in ordered]
            for selector in gf2_nullspace(rows):
                split = extract_factors(selector, ordered, N, base)
                if split is not None:
                    return FactorOutcome(
                        factors=split, method="relations", pairs=ordered, attempts=attempts
                    )

    return FactorOutcome(
        factors=None, method="exhausted", pairs=list(pairs.values()), attempts=attempts
    )
