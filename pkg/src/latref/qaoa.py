"""Exact statevector simulation of depth-p QAOA over a diagonal cost.

One layer multiplies each amplitude by exp(-i gamma E(z)) and then applies
exp(i pi beta sigma_x / 2) to every qubit. Probabilities are computed exactly
from amplitudes; there is no sampling noise anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoding import CostDiagonal
from .lattice import ResourceLimitError

TWO_PI = 2.0 * math.pi
DENSE_ORACLE_CAP = 4


@dataclass(eq=False)
class AngleSchedule:
    """Fixed angles (gamma_1..gamma_p, beta_1..beta_p).

    Angles wrap into [0, 2pi) and [0, pi) at construction so optimizer
    iterates always stay in range.
    """

    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self) -> None:
        self.gamma = np.mod(np.asarray(self.gamma, dtype=float), TWO_PI)
        self.beta = np.mod(np.asarray(self.beta, dtype=float), math.pi)
        if self.gamma.shape != self.beta.shape or self.gamma.ndim != 1:
            raise ValueError("gamma and beta must be 1-d arrays of equal length")

    @property
    def p(self) -> int:
        return self.gamma.shape[0]

    @classmethod
    def zeros(cls, p: int) -> "AngleSchedule":
        return cls(gamma=np.zeros(p), beta=np.zeros(p))

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "AngleSchedule":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] % 2:
            raise ValueError("angle vector must have even length")
        p = x.shape[0] // 2
        return cls(gamma=x[:p], beta=x[p:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta])


def _mixer_2x2(beta: float) -> np.ndarray:
    theta = math.pi * beta / 2.0
    c, s = math.cos(theta), 1j * math.sin(theta)
    return np.array([[c, s], [s, c]])


def _apply_mixer(amps: np.ndarray, beta: float, n: int) -> np.ndarray:
    # Little-endian: qubit j toggles with stride 2^j.
    theta = math.pi * beta / 2.0
    c, s = math.cos(theta), 1j * math.sin(theta)
    for j in range(n):
        view = amps.reshape(1 << (n - 1 - j), 2, 1 << j)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = c * lo + s * hi
        view[:, 1, :] = s * lo + c * hi
    return amps


def run_qaoa(diag: CostDiagonal, angles: AngleSchedule) -> np.ndarray:
    """Statevector after p alternating phase/mixer layers on |+...+>.

    Pass the normalized diagonal here; the raw diagonal stays in lattice
    units for reporting.
    """
    n = diag.n
    size = 1 << n
    if diag.energies.shape[0] != size:
        raise ValueError("diagonal length is not a power of two")
    amps = np.full(size, 2.0 ** (-n / 2.0), dtype=complex)
    for gamma, beta in zip(angles.gamma, angles.beta):
        amps *= np.exp(-1j * gamma * diag.energies)
        amps = _apply_mixer(amps, beta, n)
    return amps


def dense_oracle(diag: CostDiagonal, angles: AngleSchedule) -> np.ndarray:
    """Same state via explicit 2^n x 2^n layer matrices (verification path)."""
    n = diag.n
    if n > DENSE_ORACLE_CAP:
        raise ResourceLimitError(f"dense oracle capped at n={DENSE_ORACLE_CAP}")
    size = 1 << n
    amps = np.full(size, 2.0 ** (-n / 2.0), dtype=complex)
    for gamma, beta in zip(angles.gamma, angles.beta):
        phase = np.diag(np.exp(-1j * gamma * diag.energies))
        mixer = np.eye(1)
        for _ in range(n):
            mixer = np.kron(_mixer_2x2(beta), mixer)
        amps = mixer @ (phase @ amps)
    return amps


def outcome_probabilities(amps: np.ndarray) -> np.ndarray:
    return np.abs(amps) ** 2


def dump_probabilities(probs: np.ndarray) -> str:
    """Debug dump of a distribution, `bitstring probability` per line.

    Same little-endian layout as the diagonal dump: character j of the
    bitstring is step flag j.
    """
    n = int(probs.shape[0]).bit_length() - 1
    lines = []
    for z, value in enumerate(probs.tolist()):
        bits = "".join(str((z >> j) & 1) for j in range(n))
        lines.append(f"{bits} {value!r}")
    return "\n".join(lines) + "\n"


def expectation(amps: np.ndarray, diag: CostDiagonal) -> float:
    """Energy expectation of the state under the given diagonal.

    Works with either the raw or the normalized energies, so both the
    lattice-unit and the training-objective values are available.
    """
    if amps.shape != diag.energies.shape:
        raise ValueError("state and diagonal sizes differ")
    return float(outcome_probabilities(amps) @ diag.energies)


def refinement_probability(probs: np.ndarray, diag: CostDiagonal) -> float:
    """Total probability on states strictly below the Babai baseline."""
    if probs.shape != diag.energies.shape:
        raise ValueError("distribution and diagonal sizes differ")
    return float(probs[diag.energies < diag.baseline].sum())


def best_solution_probability(probs: np.ndarray, diag: CostDiagonal) -> float:
    """Total probability on the minimizing states (all ties counted)."""
    if probs.shape != diag.energies.shape:
        raise ValueError("distribution and diagonal sizes differ")
    return float(probs[diag.argmin_set].sum())
