"""Counter-seeded xoshiro256** generator usable inside numba kernels.

numpy Generators cannot be called from jitted code, and bit-reproducibility
of the Markov chains is part of the contract, so the chains carry their own
4-word state.  Streams are derived from a 64-bit seed via splitmix64, the
recommended seeding procedure; distinct seeds give independent streams.
"""

import numpy as np
from numba import njit

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_DOUBLE_SCALE = 1.0 / (1 << 53)


@njit(cache=True)
def _splitmix64(x):
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK
    return x, z ^ (z >> np.uint64(31))


@njit(cache=True)
def seed_state(seed):
    """xoshiro256** state from a 64-bit seed (4 splitmix64 outputs)."""
    state = np.empty(4, dtype=np.uint64)
    x = np.uint64(seed)
    for i in range(4):
        x, z = _splitmix64(x)
        state[i] = z
    return state


@njit(cache=True)
def _rotl(x, k):
    return ((x << np.uint64(k)) | (x >> np.uint64(64 - k))) & _MASK


@njit(cache=True)
def next_u64(state):
    result = (_rotl((state[1] * np.uint64(5)) & _MASK, 7) * np.uint64(9)) & _MASK
    t = (state[1] << np.uint64(17)) & _MASK
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], 45)
    return result


@njit(cache=True)
def next_double(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(next_u64(state) >> np.uint64(11)) * _DOUBLE_SCALE


@njit(cache=True)
def next_below(state, n):
    """Uniform integer in [0, n)."""
    return int(next_double(state) * n)
