"""Prime-lattice CVP instances and the classical lattice toolchain.

The lattice attached to an odd composite N is spanned by n integer columns:
a permuted small-integer diagonal on top and a bottom row of scaled prime
logarithms round(10^c * ln p_j). The CVP target carries round(10^c * ln N)
in its last coordinate, so a close lattice vector encodes a multiplicative
relation among small primes that nearly hits N.

This module provides instance construction plus the classical machinery the
refinement stages consume: Gram-Schmidt data, LLL reduction with an exact
unimodular witness, Babai's nearest-plane approximation, unit-neighbourhood
enumeration, and small-dimension brute-force oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intmath import first_primes, iround, is_prime

DEFAULT_C = 1.5
DEFAULT_DELTA = 0.75
ENUM_CAP = 24
EXACT_CVP_MAX_POINTS = 10_000_000

# Relative threshold below which a Gram-Schmidt residual counts as zero.
_GSO_DEGENERACY_RTOL = 1e-14


class DegenerateBasisError(ValueError):
    """Basis columns are linearly dependent (or numerically so)."""


class InvalidInstanceError(ValueError):
    """The composite fails the requirements for a prime-lattice instance."""


class ResourceLimitError(RuntimeError):
    """Requested enumeration exceeds the configured cap."""


@dataclass(frozen=True)
class FactorBase:
    """The first n primes, with a -1 sentinel in slot 0 for sign bookkeeping."""

    n: int
    primes: tuple[int, ...]
    p0: int = -1

    def prime(self, i: int) -> int:
        return self.p0 if i == 0 else self.primes[i - 1]

    @property
    def smooth_bound(self) -> int:
        return self.primes[-1]


def build_factor_base(n: int) -> FactorBase:
    if n < 1:
        raise ValueError(f"factor base size must be >= 1, got {n}")
    return FactorBase(n=n, primes=first_primes(n))


def dimension_for_bits(m: int) -> int:
    """Lattice rank for an m-bit composite: max(3, round(m / log2 m))."""
    if m < 4:
        raise ValueError(f"bit length must be >= 4, got {m}")
    return max(3, iround(m / math.log2(m)))


def _random_prime_with_bits(bits: int, rng: np.random.Generator) -> int:
    lo, hi = 1 << (bits - 1), (1 << bits) - 1
    while True:
        x = int(rng.integers(lo, hi + 1)) | 1
        if x > 2 and is_prime(x):
            return x


def sample_semiprime(m: int, rng: np.random.Generator) -> int:
    """An m-bit product of two distinct odd primes."""
    if m < 4:
        raise ValueError(f"bit length must be >= 4, got {m}")
    lo, hi = 1 << (m - 1), (1 << m) - 1
    for _ in range(100_000):
        p = _random_prime_with_bits(max(2, m // 2), rng)
        q_lo = max(3, (lo + p - 1) // p)
        q_hi = hi // p
        if q_lo > q_hi:
            continue
        for _ in range(64):
            q = int(rng.integers(q_lo, q_hi + 1)) | 1
            if q < q_lo or q > q_hi or q == p or not is_prime(q):
                continue
            n_val = p * q
            assert n_val.bit_length() == m and n_val % 2 == 1
            return n_val
    raise RuntimeError(f"failed to sample an {m}-bit semiprime")


@dataclass(frozen=True, eq=False)
class PrimeLatticeInstance:
    """One CVP instance: composite N, basis B (columns), and target t."""

    N: int
    m: int
    n: int
    c: float
    f: tuple[int, ...]
    B: np.ndarray  # (n+1, n) int64, column j is the j-th basis vector
    t: np.ndarray  # (n+1,) int64
    seed: int

    @property
    def base(self) -> FactorBase:
        return build_factor_base(self.n)


def build_prime_lattice(N: int, n: int, c: float, seed: int) -> PrimeLatticeInstance:
    """Construct the permuted-diagonal prime lattice and log-target for N.

    The diagonal permutation is drawn from the seed, so the same
    (N, n, c, seed) always yields the same instance.
    """
    if n < 1:
        raise ValueError(f"rank must be >= 1, got {n}")
    if c < 0:
        raise ValueError(f"precision parameter must be >= 0, got {c}")
    if N <= 2 or N % 2 == 0 or is_prime(N):
        raise InvalidInstanceError(f"N must be an odd composite > 2, got {N}")

    rng = np.random.default_rng(seed)
    multiset = np.array([(i + 1) // 2 for i in range(1, n + 1)], dtype=np.int64)
    f = tuple(int(v) for v in rng.permutation(multiset))

    scale = 10.0**c
    base = first_primes(n)
    B = np.zeros((n + 1, n), dtype=np.int64)
    for j in range(n):
        B[j, j] = f[j]
        B[n, j] = iround(scale * math.log(base[j]))
    t = np.zeros(n + 1, dtype=np.int64)
    t[n] = iround(scale * math.log(N))

    return PrimeLatticeInstance(N=N, m=N.bit_length(), n=n, c=float(c), f=f, B=B, t=t, seed=seed)


# ---------------------------------------------------------------------------
# Text serialization: header lines, then n+1 basis rows, then the target.
# All lattice data is written as exact integers.

def instance_to_text(inst: PrimeLatticeInstance) -> str:
    lines = [
        f"N {inst.N}",
        f"m {inst.m}",
        f"n {inst.n}",
        f"c {inst.c!r}",
        f"seed {inst.seed}",
    ]
    for row in inst.B.tolist():
        lines.append(" ".join(str(x) for x in row))
    lines.append(" ".join(str(x) for x in inst.t.tolist()))
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> PrimeLatticeInstance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header: dict[str, str] = {}
    for ln in lines[:5]:
        key, _, value = ln.partition(" ")
        header[key] = value.strip()
    N, m, n = int(header["N"]), int(header["m"]), int(header["n"])
    c, seed = float(header["c"]), int(header["seed"])
    rows = lines[5:]
    if len(rows) != n + 2:
        raise ValueError(f"expected {n + 2} matrix/target rows, got {len(rows)}")
    B = np.array([[int(x) for x in ln.split()] for ln in rows[: n + 1]], dtype=np.int64)
    t = np.array([int(x) for x in rows[n + 1].split()], dtype=np.int64)
    if B.shape != (n + 1, n) or t.shape != (n + 1,):
        raise ValueError("malformed instance file")
    f = tuple(int(B[j, j]) for j in range(n))
    inst = PrimeLatticeInstance(N=N, m=m, n=n, c=c, f=f, B=B, t=t, seed=seed)
    _validate_instance_shape(inst)
    return inst


def _validate_instance_shape(inst: PrimeLatticeInstance) -> None:
    n = inst.n
    upper = inst.B[:n, :]
    if np.any(upper != np.diag(np.diagonal(upper))):
        raise ValueError("basis must be diagonal above the last row")
    if np.any(np.diagonal(upper) <= 0) or np.any(inst.B[n, :] <= 0):
        raise ValueError("diagonal and log-row entries must be positive")
    if np.any(inst.t[:n] != 0) or inst.t[n] <= 0:
        raise ValueError("target must be zero except for a positive last entry")


def save_instance(inst: PrimeLatticeInstance, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(instance_to_text(inst))


def load_instance(path) -> PrimeLatticeInstance:
    with open(path, encoding="ascii") as fh:
        return instance_from_text(fh.read())


# ---------------------------------------------------------------------------
# Gram-Schmidt, LLL, Babai


@dataclass(frozen=True, eq=False)
class GsoData:
    """Unnormalized Gram-Schmidt vectors (columns), coefficients, squared norms."""

    dtilde: np.ndarray  # (rows, n) float
    mu: np.ndarray      # (n, n) float, mu[j, i] for i < j, zeros elsewhere
    norms: np.ndarray   # (n,) float, squared norms of dtilde columns


def gram_schmidt(D: np.ndarray) -> GsoData:
    """Column-wise Gram-Schmidt without normalization.

    Uses classical projection with one reorthogonalization pass, which keeps
    the residual orthogonality near machine precision for the integer bases
    handled here.
    """
    A = np.asarray(D, dtype=float)
    if A.ndim != 2:
        raise ValueError("basis must be a matrix")
    rows, n = A.shape
    if n > rows:
        raise DegenerateBasisError(f"{n} columns cannot be independent in {rows} rows")
    dtilde = np.zeros_like(A)
    mu = np.zeros((n, n))
    norms = np.zeros(n)
    for j in range(n):
        v = A[:, j].copy()
        if j:
            coeff = (dtilde[:, :j].T @ v) / norms[:j]
            v -= dtilde[:, :j] @ coeff
            extra = (dtilde[:, :j].T @ v) / norms[:j]
            v -= dtilde[:, :j] @ extra
            mu[j, :j] = coeff + extra
        nv = float(v @ v)
        col2 = float(A[:, j] @ A[:, j])
        if nv <= _GSO_DEGENERACY_RTOL * max(col2, 1.0):
            raise DegenerateBasisError(f"column {j} is dependent on its predecessors")
        dtilde[:, j] = v
        norms[j] = nv
    return GsoData(dtilde=dtilde, mu=mu, norms=norms)


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    """LLL output D with the unimodular witness U satisfying B @ U = D."""

    D: np.ndarray  # (rows, n) int64
    delta: float
    U: np.ndarray  # (n, n) int64, det = +-1

    @property
    def n(self) -> int:
        return self.D.shape[1]


def _exact_product_matches(B: np.ndarray, U: np.ndarray, D: np.ndarray) -> bool:
    Bl, Ul, Dl = B.tolist(), U.tolist(), D.tolist()
    n = len(Ul)
    for i in range(len(Bl)):
        for j in range(n):
            if sum(Bl[i][k] * Ul[k][j] for k in range(n)) != Dl[i][j]:
                return False
    return True


def lll_reduce(B: np.ndarray, delta: float = DEFAULT_DELTA) -> ReducedBasis:
    """LLL-reduce the columns of B, tracking the unimodular transform.

    Postconditions (verified by the property suite): every Gram-Schmidt
    coefficient satisfies |mu| <= 1/2 and consecutive columns satisfy
    delta * norms[k-1] <= norms[k] + mu[k,k-1]^2 * norms[k-1].
    """
    if not 0.25 < delta <= 1.0:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    Bmat = np.asarray(B, dtype=np.int64)
    D = Bmat.copy()
    rows, n = D.shape
    U = np.eye(n, dtype=np.int64)
    gso = gram_schmidt(D)
    mu, norms = gso.mu.copy(), gso.norms.copy()

    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            r = iround(mu[k, j])
            if r:
                D[:, k] -= r * D[:, j]
                U[:, k] -= r * U[:, j]
                # Column update leaves dtilde fixed; only row k of mu moves.
                mu[k, :j] -= r * mu[j, :j]
                mu[k, j] -= r
        if delta * norms[k - 1] <= norms[k] + mu[k, k - 1] ** 2 * norms[k - 1]:
            k += 1
        else:
            D[:, [k - 1, k]] = D[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            gso = gram_schmidt(D)
            mu, norms = gso.mu.copy(), gso.norms.copy()
            k = max(k - 1, 1)

    # Exact witness check in unbounded integers; also catches any silent
    # int64 overflow in the column updates.
    if not _exact_product_matches(Bmat, U, D):
        raise ArithmeticError("unimodular witness inconsistent (integer overflow?)")
    return ReducedBasis(D=D, delta=float(delta), U=U)


@dataclass(frozen=True, eq=False)
class BabaiResult:
    """Nearest-plane output: lattice point, its coefficients, per-step residuals."""

    b_op: np.ndarray       # (rows,) int64, equals D @ coeffs exactly
    coeffs: np.ndarray     # (n,) int64
    residuals: np.ndarray  # (n,) float, rounding residual per column
    dist2: float           # squared distance to the target


def babai_nearest_plane(D: np.ndarray, gso: GsoData, t: np.ndarray) -> BabaiResult:
    """Babai's nearest-plane approximation to the closest vector.

    Works down the columns, projecting the running residual onto each
    Gram-Schmidt direction and rounding. The target may live outside the
    column span; the out-of-span component simply never moves.
    """
    D = np.asarray(D, dtype=np.int64)
    rows, n = D.shape
    t = np.asarray(t)
    if t.shape != (rows,):
        raise ValueError(f"target has shape {t.shape}, expected ({rows},)")
    resid = t.astype(float).copy()
    Df = D.astype(float)
    coeffs = np.zeros(n, dtype=np.int64)
    residuals = np.zeros(n)
    for j in range(n - 1, -1, -1):
        mu_j = float(resid @ gso.dtilde[:, j]) / gso.norms[j]
        c = iround(mu_j)
        coeffs[j] = c
        residuals[j] = mu_j - c
        resid -= c * Df[:, j]
    b_op = D @ coeffs
    diff = t.astype(float) - b_op
    return BabaiResult(b_op=b_op, coeffs=coeffs, residuals=residuals,
                       dist2=float(np.dot(diff, diff)))


def enumerate_neighborhood(
    b_op: np.ndarray,
    D: np.ndarray,
    kappa: np.ndarray,
    t: np.ndarray,
    cap: int = ENUM_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """All 2^n unit-neighbourhood vectors b_op + sum_j kappa_j z_j d_j.

    Returns (vectors, dist2) indexed by the step word z, little-endian:
    bit j of the row index is the step flag for column j.
    """
    D = np.asarray(D, dtype=np.int64)
    n = D.shape[1]
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds enumeration cap {cap}")
    z = np.arange(1 << n, dtype=np.int64)
    bits = (z[:, None] >> np.arange(n)) & 1
    steps = bits * np.asarray(kappa, dtype=np.int64)[None, :]
    vectors = np.asarray(b_op, dtype=np.int64)[None, :] + steps @ D.T
    diff = vectors.astype(float) - np.asarray(t, dtype=float)[None, :]
    return vectors, np.einsum("ij,ij->i", diff, diff)


@dataclass(frozen=True, eq=False)
class CvpResult:
    v: np.ndarray       # (rows,) int64
    coeffs: np.ndarray  # (n,) int64
    dist2: float


def exact_cvp_small(B: np.ndarray, t: np.ndarray, coeff_bound: int = 2) -> CvpResult:
    """Brute-force closest vector over a coefficient box around the Babai point.

    Ties are broken toward the lexicographically smallest coefficient vector.
    Intended as a small-dimension oracle; the box must stay under
    EXACT_CVP_MAX_POINTS.
    """
    B = np.asarray(B, dtype=np.int64)
    rows, n = B.shape
    width = 2 * coeff_bound + 1
    if width**n > EXACT_CVP_MAX_POINTS:
        raise ResourceLimitError(f"coefficient box has {width}^{n} points")
    center = babai_nearest_plane(B, gram_schmidt(B), t).coeffs
    offsets = np.stack(
        np.meshgrid(*([np.arange(-coeff_bound, coeff_bound + 1)] * n), indexing="ij"),
        axis=-1,
    ).reshape(-1, n)
    coeffs = center[None, :] + offsets
    vectors = coeffs @ B.T
    diff = vectors.astype(float) - np.asarray(t, dtype=float)[None, :]
    dist2 = np.einsum("ij,ij->i", diff, diff)
    best = dist2.min()
    tied = np.flatnonzero(dist2 == best)
    winner = min(tied, key=lambda i: tuple(coeffs[i]))
    return CvpResult(v=vectors[winner], coeffs=coeffs[winner], dist2=float(best))


@dataclass(frozen=True)
class DensityReport:
    """Shortest-vector diagnostics against the Minkowski and density bounds.

    gamma_n records the Hermite-constant stand-in used (the Minkowski value
    gamma_n ~= n); minkowski_bound bounds lambda1 squared.
    """

    lambda1_sq: float
    minkowski_bound: float
    rd: float
    rd_bound: float
    gamma_n: float
    minkowski_ok: bool
    satisfied: bool


def minkowski_rd_diagnostics(
    B: np.ndarray, cap: int = 6, coeff_bound: int = 3
) -> DensityReport:
    """Relative-density diagnostics for a small lattice.

    lambda1 comes from enumerating a +-coeff_bound box over the LLL-reduced
    basis, so this is only meaningful for small n (default cap 6).
    """
    B = np.asarray(B, dtype=np.int64)
    n = B.shape[1]
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds diagnostics cap {cap}")
    reduced = lll_reduce(B)
    offsets = np.stack(
        np.meshgrid(*([np.arange(-coeff_bound, coeff_bound + 1)] * n), indexing="ij"),
        axis=-1,
    ).reshape(-1, n)
    offsets = offsets[np.any(offsets != 0, axis=1)]
    vectors = (offsets @ reduced.D.T).astype(float)
    lambda1_sq = float(np.einsum("ij,ij->i", vectors, vectors).min())

    gram = B.T.astype(float) @ B.astype(float)
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0:
        raise DegenerateBasisError("Gram determinant is not positive")
    det_l = math.exp(0.5 * logdet)

    gamma_n = float(n)
    minkowski_bound = n * det_l ** (2.0 / n)
    rd = math.sqrt(lambda1_sq) / (math.sqrt(gamma_n) * det_l ** (1.0 / n))
    rd_bound = (math.e * math.pi / (2.0 * n)) ** 0.25
    return DensityReport(
        lambda1_sq=lambda1_sq,
        minkowski_bound=minkowski_bound,
        rd=rd,
        rd_bound=rd_bound,
        gamma_n=gamma_n,
        minkowski_ok=lambda1_sq <= minkowski_bound * (1.0 + 1e-12),
        satisfied=rd <= rd_bound,
    )
