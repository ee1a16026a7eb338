import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latref.intmath import int_det
from latref.lattice import (
    DegenerateBasisError,
    InvalidInstanceError,
    ResourceLimitError,
    babai_nearest_plane,
    build_factor_base,
    build_prime_lattice,
    dimension_for_bits,
    enumerate_neighborhood,
    exact_cvp_small,
    gram_schmidt,
    instance_from_text,
    instance_to_text,
    lll_reduce,
    minkowski_rd_diagnostics,
    sample_semiprime,
)
from latref.seeding import substream

from conftest import random_instance


# --- factor base -----------------------------------------------------------

def test_factor_base_examples():
    b3 = build_factor_base(3)
    assert b3.primes == (2, 3, 5) and b3.prime(0) == -1
    assert build_factor_base(1).primes == (2,)
    assert build_factor_base(5).primes == (2, 3, 5, 7, 11)


def test_factor_base_rejects_zero():
    with pytest.raises(ValueError):
        build_factor_base(0)


# --- dimension rule ---------------------------------------------------------

def test_dimension_for_bits_endpoints():
    assert dimension_for_bits(128) == 18
    assert dimension_for_bits(4) == 3
    assert dimension_for_bits(64) == 11


@given(st.integers(min_value=4, max_value=4096))
def test_dimension_floor(m):
    assert dimension_for_bits(m) >= 3


def test_dimension_rejects_small():
    with pytest.raises(ValueError):
        dimension_for_bits(3)


# --- semiprime sampling -----------------------------------------------------

def test_sample_semiprime_four_bits_is_15():
    # 15 = 3*5 is the only 4-bit product of distinct odd primes.
    rng = np.random.default_rng(0)
    assert sample_semiprime(4, rng) == 15


@given(st.integers(min_value=4, max_value=48), st.integers(min_value=0, max_value=50))
@settings(max_examples=40, deadline=None)
def test_sample_semiprime_bit_length(m, seed):
    N = sample_semiprime(m, np.random.default_rng(seed))
    assert N.bit_length() == m and N % 2 == 1


def test_sample_semiprime_deterministic():
    a = sample_semiprime(24, np.random.default_rng(42))
    b = sample_semiprime(24, np.random.default_rng(42))
    assert a == b


def test_sample_semiprime_rejects_small():
    with pytest.raises(ValueError):
        sample_semiprime(3, np.random.default_rng(0))


# --- instance construction --------------------------------------------------

def test_prime_lattice_c1_example():
    inst = build_prime_lattice(15, 3, 1.0, seed=7)
    assert inst.B[3].tolist() == [7, 11, 16]
    assert inst.t.tolist() == [0, 0, 0, 27]
    assert sorted(inst.f) == [1, 1, 2]


def test_prime_lattice_c0_example():
    inst = build_prime_lattice(15, 3, 0.0, seed=7)
    assert inst.B[3].tolist() == [1, 1, 2]
    assert inst.t.tolist() == [0, 0, 0, 3]


def test_prime_lattice_multiset_n4():
    inst = build_prime_lattice(35, 4, 1.5, seed=1)
    assert sorted(inst.f) == [1, 1, 2, 2]
    assert all(inst.B[j, j] == inst.f[j] for j in range(4))


def test_prime_lattice_deterministic():
    a = build_prime_lattice(77, 5, 1.5, seed=123)
    b = build_prime_lattice(77, 5, 1.5, seed=123)
    assert a.f == b.f and np.array_equal(a.B, b.B)


def test_prime_lattice_rejects_even_and_prime():
    with pytest.raises(InvalidInstanceError):
        build_prime_lattice(16, 3, 1.5, seed=0)
    with pytest.raises(InvalidInstanceError):
        build_prime_lattice(17, 3, 1.5, seed=0)


@given(st.integers(min_value=0, max_value=200))
@settings(max_examples=30, deadline=None)
def test_prime_lattice_rounding_matches_high_precision(seed):
    """The scaled-log entries must agree with a 50-digit rounding oracle."""
    rng = substream(seed, 1)
    m = int(rng.integers(6, 40))
    N = sample_semiprime(m, rng)
    n = int(rng.integers(1, 8))
    c = float(rng.choice([0.0, 0.5, 1.0, 1.5, 2.0, 2.5]))
    inst = build_prime_lattice(N, n, c, seed)
    with mpmath.workdps(50):
        scale = mpmath.mpf(10) ** c
        for j, p in enumerate(inst.base.primes):
            assert inst.B[n, j] == int(mpmath.floor(scale * mpmath.log(p) + mpmath.mpf("0.5")))
        assert inst.t[n] == int(mpmath.floor(scale * mpmath.log(N) + mpmath.mpf("0.5")))


# --- serialization ----------------------------------------------------------

@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_instance_text_round_trip(seed):
    inst = random_instance(seed)
    clone = instance_from_text(instance_to_text(inst))
    assert clone.N == inst.N and clone.m == inst.m and clone.n == inst.n
    assert clone.c == inst.c and clone.seed == inst.seed and clone.f == inst.f
    assert np.array_equal(clone.B, inst.B) and np.array_equal(clone.t, inst.t)


def test_instance_text_is_integer_only():
    inst = build_prime_lattice(15, 3, 1.5, seed=3)
    body = instance_to_text(inst).splitlines()[5:]
    for line in body:
        for tok in line.split():
            int(tok)  # raises on any float leak


# --- Gram-Schmidt -----------------------------------------------------------

def test_gram_schmidt_identity():
    g = gram_schmidt(np.eye(3))
    assert np.allclose(g.dtilde, np.eye(3))
    assert np.allclose(g.mu, np.zeros((3, 3)))


def test_gram_schmidt_projection_example():
    g = gram_schmidt(np.array([[2, 3], [0, 1]]))
    assert np.allclose(g.dtilde[:, 1], [0.0, 1.0])
    assert g.mu[1, 0] == pytest.approx(1.5)


def test_gram_schmidt_rejects_dependent():
    with pytest.raises(DegenerateBasisError):
        gram_schmidt(np.array([[1, 2], [2, 4]]))


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=30, deadline=None)
def test_gram_schmidt_invariants(seed):
    inst = random_instance(seed, n_range=(2, 10))
    g = gram_schmidt(inst.B)
    # pairwise orthogonality, relative 1e-9
    cross = g.dtilde.T @ g.dtilde
    off = cross - np.diag(np.diag(cross))
    scale = np.sqrt(np.outer(g.norms, g.norms))
    assert np.abs(off / scale).max() < 1e-9
    # reconstruction d_j = dtilde_j + sum_{i<j} mu_ji dtilde_i
    rebuilt = g.dtilde + g.dtilde @ g.mu.T
    denom = max(1.0, float(np.abs(inst.B).max()))
    assert np.abs(rebuilt - inst.B).max() / denom < 1e-9


# --- LLL ---------------------------------------------------------------------

def test_lll_identity_unchanged():
    red = lll_reduce(np.eye(4, dtype=np.int64))
    assert np.array_equal(red.D, np.eye(4, dtype=np.int64))
    assert np.array_equal(red.U, np.eye(4, dtype=np.int64))


def test_lll_two_dim_example():
    red = lll_reduce(np.array([[2, 3], [0, 1]]), 0.75)

    def canon(col):
        v = [int(x) for x in col]
        sign = 1 if (v[0] > 0 or (v[0] == 0 and v[1] > 0)) else -1
        return tuple(sign * x for x in v)

    # hand-traced reduction: columns (-1, 1) and (1, 1) up to sign
    assert {canon(red.D[:, 0]), canon(red.D[:, 1])} == {(1, -1), (1, 1)}
    assert int_det(red.U.tolist()) in (1, -1)


def test_lll_single_column():
    red = lll_reduce(np.array([[5], [3]]))
    assert np.array_equal(red.D, [[5], [3]])


def test_lll_delta_range():
    with pytest.raises(ValueError):
        lll_reduce(np.eye(2, dtype=np.int64), delta=0.25)
    with pytest.raises(ValueError):
        lll_reduce(np.eye(2, dtype=np.int64), delta=1.01)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=40, deadline=None)
def test_lll_postconditions(seed):
    inst = random_instance(seed, n_range=(2, 10))
    red = lll_reduce(inst.B, delta=0.75)
    g = gram_schmidt(red.D)
    assert np.abs(np.tril(g.mu, -1)).max() <= 0.5 + 1e-9
    for k in range(1, inst.n):
        lhs = 0.75 * g.norms[k - 1]
        rhs = g.norms[k] + g.mu[k, k - 1] ** 2 * g.norms[k - 1]
        assert lhs <= rhs + 1e-9 * g.norms[k - 1]
    assert int_det(red.U.tolist()) in (1, -1)
    # lattice preserved: B @ U == D in exact arithmetic
    prod = [[sum(int(inst.B[i, k]) * int(red.U[k, j]) for k in range(inst.n))
             for j in range(inst.n)] for i in range(inst.n + 1)]
    assert prod == red.D.tolist()


# --- Babai -------------------------------------------------------------------

def test_babai_orthogonal_rounding():
    D = np.eye(2, dtype=np.int64)
    res = babai_nearest_plane(D, gram_schmidt(D), np.array([0.6, 1.2]))
    assert res.b_op.tolist() == [1, 1] and res.coeffs.tolist() == [1, 1]


def test_babai_zero_target():
    D = np.array([[2, 1], [0, 3]])
    res = babai_nearest_plane(D, gram_schmidt(D), np.zeros(2))
    assert res.b_op.tolist() == [0, 0] and res.dist2 == 0.0


def test_babai_diagonal_example():
    D = np.array([[2, 0], [0, 3]])
    res = babai_nearest_plane(D, gram_schmidt(D), np.array([2.9, 1.4]))
    assert res.coeffs.tolist() == [1, 0]
    assert res.b_op.tolist() == [2, 0]


def test_babai_dimension_mismatch():
    D = np.eye(2, dtype=np.int64)
    with pytest.raises(ValueError):
        babai_nearest_plane(D, gram_schmidt(D), np.zeros(3))


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_babai_recovers_lattice_points(seed):
    inst = random_instance(seed, n_range=(2, 8))
    red = lll_reduce(inst.B)
    gso = gram_schmidt(red.D)
    rng = substream(seed, 5)
    x = rng.integers(-4, 5, size=inst.n)
    v = red.D @ x
    res = babai_nearest_plane(red.D, gso, v)
    assert res.dist2 == 0.0
    assert np.abs(res.residuals).max() < 1e-9


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=20, deadline=None)
def test_babai_residual_bound(seed):
    inst = random_instance(seed, n_range=(2, 8))
    red = lll_reduce(inst.B)
    res = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
    assert np.abs(res.residuals).max() <= 0.5 + 1e-12
    assert np.array_equal(res.b_op, red.D @ res.coeffs)


# --- neighbourhood enumeration ----------------------------------------------

def test_enumerate_single_direction():
    D = np.array([[2], [0]])
    b_op = np.array([4, 0])
    t = np.array([5, 0])
    vectors, dist2 = enumerate_neighborhood(b_op, D, np.array([1]), t)
    assert vectors.tolist() == [[4, 0], [6, 0]]
    assert dist2.tolist() == [1.0, 1.0]


def test_enumerate_zero_word_is_babai():
    inst = random_instance(3, n_range=(2, 6))
    red = lll_reduce(inst.B)
    res = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
    kappa = np.where(res.residuals >= 0, 1, -1)
    vectors, dist2 = enumerate_neighborhood(res.b_op, red.D, kappa, inst.t)
    assert np.array_equal(vectors[0], res.b_op)
    assert dist2[0] == res.dist2


def test_enumerate_min_matches_restricted_brute_force():
    inst = random_instance(11, n_range=(3, 3))
    red = lll_reduce(inst.B)
    res = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
    kappa = np.where(res.residuals >= 0, 1, -1)
    vectors, dist2 = enumerate_neighborhood(res.b_op, red.D, kappa, inst.t)
    best = min(
        float(np.sum((res.b_op + red.D @ (kappa * np.array(bits)) - inst.t) ** 2))
        for bits in [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    )
    assert dist2.min() == pytest.approx(best)


def test_enumerate_cap():
    D = np.zeros((26, 25), dtype=np.int64)
    with pytest.raises(ResourceLimitError):
        enumerate_neighborhood(np.zeros(26), D, np.ones(25), np.zeros(26), cap=24)


# --- exact CVP oracle ---------------------------------------------------------

def test_exact_cvp_identity():
    res = exact_cvp_small(np.eye(2, dtype=np.int64), np.array([0.6, 1.2]))
    assert res.v.tolist() == [1, 1]


def test_exact_cvp_on_lattice_point():
    B = np.array([[3, 1], [0, 2]])
    target = B @ np.array([2, -1])
    res = exact_cvp_small(B, target)
    assert res.dist2 == 0.0 and res.v.tolist() == target.tolist()


def test_exact_cvp_dominates_babai():
    inst = random_instance(17, n_range=(4, 4))
    red = lll_reduce(inst.B)
    babai = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
    oracle = exact_cvp_small(red.D, inst.t)
    assert oracle.dist2 <= babai.dist2 + 1e-9


def test_exact_cvp_box_limit():
    B = np.eye(12, dtype=np.int64)
    with pytest.raises(ResourceLimitError):
        exact_cvp_small(B, np.zeros(12), coeff_bound=4)


def test_exact_cvp_tie_breaks_lexicographically():
    # Target equidistant from 0 and 1: the smaller coefficient vector wins.
    res = exact_cvp_small(np.eye(1, dtype=np.int64), np.array([0.5]))
    assert res.coeffs.tolist() == [0]
    res2 = exact_cvp_small(np.eye(2, dtype=np.int64), np.array([0.5, 0.5]))
    assert res2.coeffs.tolist() == [0, 0]


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=15, deadline=None)
def test_babai_approximation_guarantee(seed):
    inst = random_instance(seed, m_range=(8, 20), n_range=(3, 5))
    red = lll_reduce(inst.B)
    babai = babai_nearest_plane(red.D, gram_schmidt(red.D), inst.t)
    oracle = exact_cvp_small(red.D, inst.t)
    bound = 2.0 * (2.0 / math.sqrt(3.0)) ** inst.n
    assert math.sqrt(babai.dist2) <= bound * math.sqrt(oracle.dist2) * (1 + 1e-12)


# --- density diagnostics ------------------------------------------------------

def test_diagnostics_unit_lattice():
    rep = minkowski_rd_diagnostics(np.eye(2, dtype=np.int64))
    assert rep.lambda1_sq == pytest.approx(1.0)
    assert rep.minkowski_bound == pytest.approx(2.0)
    assert rep.minkowski_ok and rep.satisfied
    assert rep.gamma_n == 2.0


def test_diagnostics_diag14():
    rep = minkowski_rd_diagnostics(np.diag([1, 4]).astype(np.int64))
    assert rep.lambda1_sq == pytest.approx(1.0)
    assert rep.minkowski_bound == pytest.approx(2.0 * 4.0)
    assert rep.rd == pytest.approx(1.0 / (math.sqrt(2.0) * 2.0))
    assert rep.satisfied


def test_diagnostics_definitional_rd():
    inst = random_instance(23, n_range=(3, 3))
    rep = minkowski_rd_diagnostics(inst.B)
    det_l = math.sqrt(np.linalg.det(inst.B.T.astype(float) @ inst.B.astype(float)))
    expected = math.sqrt(rep.lambda1_sq) / (math.sqrt(3.0) * det_l ** (1.0 / 3.0))
    assert rep.rd == pytest.approx(expected, rel=1e-9)
    assert rep.minkowski_ok


def test_diagnostics_cap():
    with pytest.raises(ResourceLimitError):
        minkowski_rd_diagnostics(np.eye(7, dtype=np.int64))
