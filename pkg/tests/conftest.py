import numpy as np
import pytest

from latref.lattice import build_prime_lattice, dimension_for_bits, sample_semiprime
from latref.seeding import substream


def random_instance(seed: int, m_range=(8, 32), n_range=None, c: float = 1.5):
    """One seeded prime-lattice instance for property tests."""
    rng = substream(seed, 777)
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    N = sample_semiprime(m, rng)
    n = dimension_for_bits(m) if n_range is None else int(rng.integers(n_range[0], n_range[1] + 1))
    return build_prime_lattice(N, n, c, int(rng.integers(0, 2**63 - 1)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
