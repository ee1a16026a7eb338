"""Deterministic RNG substreams derived from a master seed.

Every random draw in the package flows through a generator obtained here, so
results depend only on the (master seed, coordinates) path and never on
scheduling or worker count.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one (master seed, path...) coordinate."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, *path])))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a storable integer seed from an existing stream."""
    return int(rng.integers(0, 2**63 - 1))
