"""Seeded, splittable random streams.

Every random draw in the package comes from a numpy SeedSequence derived from one integer seed plus a fixed
spawn key, so a stream only depends on (seed, key) and never on worker layout or execution order.
"""
import numpy as np


__all__ = ['MAX_SEED', 'check_seed', 'seed_sequence', 'generator', 'as_generator', 'as_seed',
           'PROTOCOL_KEY', 'SEARCH_KEY', 'SCAN_KEY', 'FIG3_KEY', 'BASIS_KEY']


MAX_SEED = 2 ** 64

# Spawn key roots
PROTOCOL_KEY = 1
SEARCH_KEY = 2
SCAN_KEY = 3
FIG3_KEY = 4
BASIS_KEY = 5


def check_seed(seed):
    """Return the seed as an int or raise ValueError if it is not a 64-bit unsigned integer."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError('Seed must be an integer, got {!r}'.format(seed))
    seed = int(seed)
    if seed < 0 or seed >= MAX_SEED:
        raise ValueError('Seed must be in [0, 2**64), got {}'.format(seed))
    return seed


def seed_sequence(seed, *key):
    """Return the SeedSequence for the given seed and spawn key."""
    return np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))


def generator(seed, *key):
    """Return a PCG64 Generator for the given seed and spawn key."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def as_generator(rng_state, *key):
    """Return a Generator from a Generator (used as is) or an integer seed."""
    if isinstance(rng_state, np.random.Generator):
        return rng_state
    return generator(rng_state, *key)


def as_seed(rng_state):
    """Return an integer seed from a seed (checked) or a Generator (one draw from it)."""
    if isinstance(rng_state, np.random.Generator):
        return int(rng_state.integers(0, MAX_SEED, dtype=np.uint64))
    return check_seed(rng_state)
