"""Seeded randomness for the whole package.

Every randomized operation takes an explicit 64-bit unsigned seed and derives
its streams from the counter-based Philox generator, keyed through numpy's
``SeedSequence``.  Distinct sub-streams are addressed by integer paths
(``spawn_key``), so concurrent or reordered consumers see the same draws.
All randomized behavior in this package is a deterministic function of
(seed, parameters).
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2^64): got {seed}")
    return seed


def generator(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for ``seed``, optionally split off along an integer path."""
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed for ``seed`` at the given path, stable across calls."""
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
