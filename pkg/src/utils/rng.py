"""Seeded random streams for reproducible simulations.

Every stream is derived from a 64-bit seed through numpy's SeedSequence, so a
(seed, purpose) pair always yields the same draws regardless of call order.
"""
from typing import List

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Generator for a single seeded stream."""
    return np.random.default_rng(np.random.SeedSequence(seed & SEED_MASK))


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child streams of one seed, in a fixed order."""
    children = np.random.SeedSequence(seed & SEED_MASK).spawn(count)
    return [np.random.default_rng(child) for child in children]


def subject_uniforms(rng: np.random.Generator, n_subjects: int, draws: int = 3) -> np.ndarray:
    """
    Uniform draws laid out one row per subject.

    Row i depends only on the stream state and i, so subject i sees the same
    numbers however the rows are later partitioned.
    """
    return rng.random((n_subjects, draws))
