"""Seeded random streams.

All randomness flows through :class:`numpy.random.Generator` objects built
on PCG64.  Independent streams for grid cells and trials are derived from a
root seed with :class:`numpy.random.SeedSequence` spawn keys.
"""

from __future__ import annotations

import numpy as np


def make_rng(rng=None) -> np.random.Generator:
    """Coerce a seed, SeedSequence or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def trial_seed(root_seed: int, *key: int) -> np.random.SeedSequence:
    """Seed sequence for the stream identified by ``key`` under ``root_seed``."""
    return np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(k) for k in key))


def seed_to_int(ss: np.random.SeedSequence) -> int:
    """64-bit integer fingerprint of a seed sequence, for records."""
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])
