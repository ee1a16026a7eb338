"""Diagonal cost encoding of the unit-neighbourhood refinement.

Each of the 2^n step words z selects a neighbour b_op + sum_j kappa_j z_j d_j
of the Babai point; its energy is the squared distance to the target. The
diagonal is built incrementally in Gray-code order and can also be expanded
into explicit binary-quadratic coefficients for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import (
    DEFAULT_DELTA,
    ENUM_CAP,
    BabaiResult,
    PrimeLatticeInstance,
    ReducedBasis,
    ResourceLimitError,
    babai_nearest_plane,
    gram_schmidt,
    lll_reduce,
)


def compute_kappa(residuals: np.ndarray) -> np.ndarray:
    """Step signs from the Babai rounding residuals: +1 for >= 0, else -1."""
    residuals = np.asarray(residuals, dtype=float)
    return np.where(residuals >= 0.0, 1, -1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class CostDiagonal:
    """Energies of all 2^n neighbourhood states, little-endian bit order."""

    energies: np.ndarray   # (2^n,) float64
    baseline: float        # energies[0], the Babai distance squared
    e_min: float
    e_max: float
    argmin_set: np.ndarray  # indices of every minimizing state

    @classmethod
    def from_energies(cls, energies: np.ndarray) -> "CostDiagonal":
        energies = np.asarray(energies, dtype=float)
        size = energies.shape[0]
        if size == 0 or size & (size - 1):
            raise ValueError("energy array length must be a power of two")
        e_min = float(energies.min())
        return cls(
            energies=energies,
            baseline=float(energies[0]),
            e_min=e_min,
            e_max=float(energies.max()),
            argmin_set=np.flatnonzero(energies == e_min),
        )

    @property
    def n(self) -> int:
        return int(self.energies.shape[0]).bit_length() - 1


def cost(z: int, t: np.ndarray, b_op: np.ndarray, kappa: np.ndarray, D: np.ndarray) -> float:
    """Direct energy of one step word: ||t - b_op - sum_j kappa_j z_j d_j||^2."""
    n = np.asarray(D).shape[1]
    bits = (z >> np.arange(n)) & 1
    v = np.asarray(b_op, dtype=np.int64) + np.asarray(D, dtype=np.int64) @ (
        np.asarray(kappa, dtype=np.int64) * bits
    )
    diff = np.asarray(t, dtype=float) - v
    return float(diff @ diff)


def diagonal_from_parts(
    t: np.ndarray,
    b_op: np.ndarray,
    kappa: np.ndarray,
    D: np.ndarray,
    cap: int = ENUM_CAP,
) -> CostDiagonal:
    """Build the full diagonal by a Gray-code walk.

    Each step flips one bit of the step word and updates the residual vector
    by -+kappa_j d_j, so the whole table costs one vector op per state.
    """
    D = np.asarray(D, dtype=np.int64)
    n = D.shape[1]
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds diagonal cap {cap}")
    steps = D.astype(float) * np.asarray(kappa, dtype=float)[None, :]
    resid = np.asarray(t, dtype=float) - np.asarray(b_op, dtype=float)
    energies = np.empty(1 << n)
    energies[0] = resid @ resid
    prev = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        j = (g ^ prev).bit_length() - 1
        if (g >> j) & 1:
            resid -= steps[:, j]
        else:
            resid += steps[:, j]
        energies[g] = resid @ resid
        prev = g
    return CostDiagonal.from_energies(energies)


def build_diagonal(
    instance: PrimeLatticeInstance,
    babai: BabaiResult,
    reduced: ReducedBasis,
    cap: int = ENUM_CAP,
) -> CostDiagonal:
    kappa = compute_kappa(babai.residuals)
    return diagonal_from_parts(instance.t, babai.b_op, kappa, reduced.D, cap=cap)


@dataclass(frozen=True, eq=False)
class QuboCoefficients:
    """Binary-quadratic expansion: constant + sum h_j z_j + sum_{j<k} J_jk z_j z_k."""

    constant: float
    linear: np.ndarray     # (n,) float
    quadratic: np.ndarray  # (n, n) float, strictly upper triangular

    def evaluate(self, z: int) -> float:
        n = self.linear.shape[0]
        bits = ((z >> np.arange(n)) & 1).astype(float)
        return float(self.constant + self.linear @ bits + bits @ self.quadratic @ bits)

    def evaluate_all(self) -> np.ndarray:
        n = self.linear.shape[0]
        idx = np.arange(1 << n)
        bits = ((idx[:, None] >> np.arange(n)) & 1).astype(float)
        return self.constant + bits @ self.linear + np.einsum(
            "zi,ij,zj->z", bits, self.quadratic, bits
        )


def qubo_from_parts(
    t: np.ndarray, b_op: np.ndarray, kappa: np.ndarray, D: np.ndarray
) -> QuboCoefficients:
    """Expand the neighbourhood energy into explicit binary coefficients.

    Squares of binary variables fold into the linear terms, so
    h_j = ||d_j||^2 - 2 kappa_j <r0, d_j> and J_jk = 2 kappa_j kappa_k <d_j, d_k>
    around the constant ||r0||^2 with r0 = t - b_op.
    """
    Df = np.asarray(D, dtype=float)
    kap = np.asarray(kappa, dtype=float)
    r0 = np.asarray(t, dtype=float) - np.asarray(b_op, dtype=float)
    steps = Df * kap[None, :]
    gram = steps.T @ steps
    linear = np.diag(gram) - 2.0 * (steps.T @ r0)
    quadratic = np.triu(2.0 * gram, k=1)
    return QuboCoefficients(constant=float(r0 @ r0), linear=linear, quadratic=quadratic)


def to_qubo_coefficients(
    instance: PrimeLatticeInstance, babai: BabaiResult, reduced: ReducedBasis
) -> QuboCoefficients:
    kappa = compute_kappa(babai.residuals)
    return qubo_from_parts(instance.t, babai.b_op, kappa, reduced.D)


def normalize_diagonal(diag: CostDiagonal, mode: str = "minmax") -> CostDiagonal:
    """Rescale energies to [0, 1] (mode "minmax") or pass through (mode "off").

    The map is affine and increasing, so minimizers and the set of states
    beating the baseline are unchanged. A constant diagonal collapses to all
    zeros.
    """
    if mode == "off":
        return diag
    if mode != "minmax":
        raise ValueError(f"unknown normalization mode {mode!r}")
    span = diag.e_max - diag.e_min
    if span <= 0.0:
        scaled = np.zeros_like(diag.energies)
    else:
        scaled = (diag.energies - diag.e_min) / span
    return replace(
        diag,
        energies=scaled,
        baseline=float(scaled[0]),
        e_min=float(scaled.min()),
        e_max=float(scaled.max()),
        argmin_set=diag.argmin_set.copy(),
    )


def dump_diagonal(diag: CostDiagonal) -> str:
    """Debug dump, one `bitstring energy` line per state in index order.

    Bitstrings are little-endian: character j is the step flag for column j.
    """
    n = diag.n
    lines = []
    for z, e in enumerate(diag.energies.tolist()):
        bits = "".join(str((z >> j) & 1) for j in range(n))
        lines.append(f"{bits} {e!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Refinement:
    """Classical approximation pipeline output for one instance."""

    instance: PrimeLatticeInstance
    reduced: ReducedBasis
    babai: BabaiResult
    kappa: np.ndarray
    diagonal: CostDiagonal  # raw energies, in lattice units

    @property
    def omitted(self) -> bool:
        """True when no neighbourhood state beats the Babai point."""
        return not bool(np.any(self.diagonal.energies < self.diagonal.baseline))


def prepare_refinement(
    instance: PrimeLatticeInstance,
    delta: float = DEFAULT_DELTA,
    cap: int = ENUM_CAP,
) -> Refinement:
    """Reduce, approximate, and encode one instance end to end."""
    reduced = lll_reduce(instance.B, delta=delta)
    gso = gram_schmidt(reduced.D)
    babai = babai_nearest_plane(reduced.D, gso, instance.t)
    kappa = compute_kappa(babai.residuals)
    diagonal = diagonal_from_parts(instance.t, babai.b_op, kappa, reduced.D, cap=cap)
    return Refinement(
        instance=instance, reduced=reduced, babai=babai, kappa=kappa, diagonal=diagonal
    )
