import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latref.encoding import CostDiagonal
from latref.lattice import ResourceLimitError
from latref.qaoa import (
    AngleSchedule,
    best_solution_probability,
    dense_oracle,
    dump_probabilities,
    expectation,
    outcome_probabilities,
    refinement_probability,
    run_qaoa,
)

angles_st = st.integers(min_value=0, max_value=10**6)


def _random_problem(seed, n_max=4, p_max=3):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    p = int(rng.integers(0, p_max + 1))
    diag = CostDiagonal.from_energies(rng.random(1 << n))
    sched = AngleSchedule(
        gamma=rng.uniform(0, 2 * math.pi, p), beta=rng.uniform(0, math.pi, p)
    )
    return diag, sched


# --- schedules ---------------------------------------------------------------

def test_schedule_wraps_into_range():
    sched = AngleSchedule(gamma=np.array([7.0, -1.0]), beta=np.array([4.0, -0.5]))
    assert np.all((sched.gamma >= 0) & (sched.gamma < 2 * math.pi))
    assert np.all((sched.beta >= 0) & (sched.beta < math.pi))
    assert sched.gamma[0] == pytest.approx(7.0 - 2 * math.pi)
    assert sched.beta[0] == pytest.approx(4.0 - math.pi)


def test_schedule_vector_round_trip():
    sched = AngleSchedule(gamma=np.array([0.1, 0.2]), beta=np.array([0.3, 0.4]))
    clone = AngleSchedule.from_vector(sched.as_vector())
    assert np.allclose(clone.gamma, sched.gamma)
    assert np.allclose(clone.beta, sched.beta)
    assert sched.p == 2


def test_schedule_rejects_mismatch():
    with pytest.raises(ValueError):
        AngleSchedule(gamma=np.zeros(2), beta=np.zeros(3))
    with pytest.raises(ValueError):
        AngleSchedule.from_vector(np.zeros(3))


# --- degenerate runs ----------------------------------------------------------

def test_p0_is_uniform():
    diag = CostDiagonal.from_energies(np.arange(8.0))
    amps = run_qaoa(diag, AngleSchedule.zeros(0))
    assert np.abs(amps - 2.0 ** -1.5).max() == 0.0


def test_beta_zero_keeps_uniform_probabilities():
    rng = np.random.default_rng(1)
    diag = CostDiagonal.from_energies(rng.random(16))
    sched = AngleSchedule(gamma=rng.uniform(0, 2 * math.pi, 3), beta=np.zeros(3))
    probs = outcome_probabilities(run_qaoa(diag, sched))
    assert np.abs(probs - 1 / 16).max() <= 1e-12


def test_gamma_zero_keeps_uniform_probabilities():
    rng = np.random.default_rng(2)
    diag = CostDiagonal.from_energies(rng.random(8))
    sched = AngleSchedule(gamma=np.zeros(2), beta=rng.uniform(0, math.pi, 2))
    probs = outcome_probabilities(run_qaoa(diag, sched))
    assert np.abs(probs - 1 / 8).max() <= 1e-12


# --- oracle equivalence --------------------------------------------------------

@given(angles_st)
@settings(max_examples=60, deadline=None)
def test_run_qaoa_matches_dense_oracle(seed):
    diag, sched = _random_problem(seed)
    fast = run_qaoa(diag, sched)
    dense = dense_oracle(diag, sched)
    assert np.abs(fast - dense).max() < 1e-9


def test_single_qubit_closed_form():
    gamma, beta = 1.234, 0.567
    diag = CostDiagonal.from_energies(np.array([0.0, 1.0]))
    sched = AngleSchedule(gamma=np.array([gamma]), beta=np.array([beta]))
    amps = run_qaoa(diag, sched)
    theta = math.pi * beta / 2
    phase = cmath.exp(-1j * gamma)
    expected0 = (math.cos(theta) + 1j * math.sin(theta) * phase) / math.sqrt(2)
    expected1 = (1j * math.sin(theta) + math.cos(theta) * phase) / math.sqrt(2)
    assert abs(amps[0] - expected0) < 1e-12
    assert abs(amps[1] - expected1) < 1e-12


def test_dense_oracle_cap():
    diag = CostDiagonal.from_energies(np.zeros(32))
    with pytest.raises(ResourceLimitError):
        dense_oracle(diag, AngleSchedule.zeros(1))


# --- state properties -----------------------------------------------------------

@given(angles_st)
@settings(max_examples=60, deadline=None)
def test_norm_preserved(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    p = int(rng.integers(0, 11))
    diag = CostDiagonal.from_energies(rng.random(1 << n))
    sched = AngleSchedule(gamma=rng.uniform(0, 2 * math.pi, p), beta=rng.uniform(0, math.pi, p))
    amps = run_qaoa(diag, sched)
    assert abs(float(np.vdot(amps, amps).real) - 1.0) <= 1e-12


@given(angles_st)
@settings(max_examples=30, deadline=None)
def test_permutation_covariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    p = int(rng.integers(1, 4))
    energies = rng.random(1 << n)
    sched = AngleSchedule(gamma=rng.uniform(0, 2 * math.pi, p), beta=rng.uniform(0, math.pi, p))
    perm = rng.permutation(n)
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n)) & 1
    permuted_idx = (bits << perm).sum(axis=1)
    amps = run_qaoa(CostDiagonal.from_energies(energies), sched)
    relabeled = np.empty_like(energies)
    relabeled[permuted_idx] = energies
    amps_perm = run_qaoa(CostDiagonal.from_energies(relabeled), sched)
    assert np.abs(amps_perm[permuted_idx] - amps).max() < 1e-12


# --- statistics -----------------------------------------------------------------

def test_expectation_uniform_is_mean():
    diag = CostDiagonal.from_energies(np.array([1.0, 2.0, 3.0, 4.0]))
    amps = run_qaoa(diag, AngleSchedule.zeros(0))
    assert expectation(amps, diag) == pytest.approx(2.5)


def test_expectation_basis_state_is_min():
    diag = CostDiagonal.from_energies(np.array([3.0, 1.0, 2.0, 5.0]))
    amps = np.zeros(4, dtype=complex)
    amps[1] = 1.0
    assert expectation(amps, diag) == pytest.approx(1.0)


@given(angles_st)
@settings(max_examples=40, deadline=None)
def test_expectation_matches_direct_sum(seed):
    diag, sched = _random_problem(seed)
    amps = run_qaoa(diag, sched)
    direct = sum(abs(a) ** 2 * e for a, e in zip(amps, diag.energies))
    assert expectation(amps, diag) == pytest.approx(float(direct), rel=1e-12)


def test_refinement_probability_uniform_counts():
    energies = np.array([4.0, 5.0, 1.0, 2.0, 4.0, 0.5, 9.0, 4.0])
    diag = CostDiagonal.from_energies(energies)
    probs = np.full(8, 1 / 8)
    improving = int((energies < 4.0).sum())
    assert refinement_probability(probs, diag) == pytest.approx(improving / 8)


def test_refinement_probability_zero_when_baseline_optimal():
    diag = CostDiagonal.from_energies(np.array([1.0, 2.0, 3.0, 4.0]))
    probs = np.full(4, 0.25)
    assert refinement_probability(probs, diag) == 0.0


@given(angles_st)
@settings(max_examples=40, deadline=None)
def test_refinement_partition(seed):
    diag, sched = _random_problem(seed)
    probs = outcome_probabilities(run_qaoa(diag, sched))
    q = refinement_probability(probs, diag)
    rest = float(probs[diag.energies >= diag.baseline].sum())
    assert q + rest == pytest.approx(1.0, abs=1e-12)


def test_best_solution_probability_cases():
    diag = CostDiagonal.from_energies(np.array([3.0, 1.0, 1.0, 2.0]))
    uniform = np.full(4, 0.25)
    assert best_solution_probability(uniform, diag) == pytest.approx(0.5)
    spike = np.array([0.0, 1.0, 0.0, 0.0])
    assert best_solution_probability(spike, diag) == pytest.approx(1.0)


@given(angles_st)
@settings(max_examples=40, deadline=None)
def test_best_solution_probability_matches_scan(seed):
    diag, sched = _random_problem(seed)
    probs = outcome_probabilities(run_qaoa(diag, sched))
    manual = sum(probs[i] for i in range(len(probs)) if diag.energies[i] == diag.e_min)
    assert best_solution_probability(probs, diag) == pytest.approx(float(manual), rel=1e-12)


def test_dump_probabilities_format():
    lines = dump_probabilities(np.array([0.5, 0.25, 0.125, 0.125])).splitlines()
    assert lines == ["00 0.5", "10 0.25", "01 0.125", "11 0.125"]
