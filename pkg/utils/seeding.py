"""
Seed stream splitting.

Every random quantity in an experiment descends from one master seed.
Child seeds are derived by hashing (master, key, key, ...) through numpy's
SeedSequence, so a replicate's stream depends only on its index and never
on scheduling or thread count.
"""
from typing import Union

import numpy as np

# Stream keys used inside a single sv_model draw
LATENT_STREAM = 0
INNOVATION_STREAM = 1

SeedKey = Union[int, np.integer]


def derive_seed(master_seed: SeedKey, *keys: SeedKey) -> int:
    """
    Derive a 63-bit child seed from a master seed and integer keys.

    Args:
        master_seed: Nonnegative master seed
        *keys: Nonnegative integers (replicate index, stream id, ...)

    Returns:
        Child seed as a Python int in [0, 2**63)
    """
    entropy = [int(master_seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError(f"Seeds and stream keys must be nonnegative, got {entropy}")
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def make_rng(seed: SeedKey, *keys: SeedKey) -> np.random.Generator:
    """Generator for a seed, optionally split further by stream keys."""
    if keys:
        return np.random.default_rng(derive_seed(seed, *keys))
    return np.random.default_rng(int(seed))
