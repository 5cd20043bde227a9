"""Deterministic random streams.

All randomness in the package flows through numpy's PCG64 generator,
seeded via SeedSequence so that (seed, stream) pairs name independent,
reproducible streams on every platform.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for the given (seed, stream) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def sample_gaussian(count: int, seed: int, stream: int = 0, dtype=np.float32) -> np.ndarray:
    """i.i.d. standard-normal draws; same (seed, stream) gives the same sequence."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return make_rng(seed, stream).standard_normal(count).astype(dtype)
