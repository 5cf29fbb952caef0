"""Deterministic random number generation shared by every solver path.

The package random source is xoshiro256++ seeded through splitmix64.  The
same compiled primitives drive the arithmetic solver, the bit-level solver,
and both annealing variants, so equal seeds give bit-identical trajectories
across engines.  Consumption order is part of each solver's contract and is
documented on the solver functions.

Stream derivation: per-trial seeds come from
``derive_stream_seed(master_seed, context, trial_index)`` (blake2b, 8-byte
digest), so trials are statistically independent and reproducible no matter
how work is scheduled.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numba import njit

U64 = np.uint64

_SPLITMIX_GAMMA = U64(0x9E3779B97F4A7C15)
_SPLITMIX_M1 = U64(0xBF58476D1CE4E5B9)
_SPLITMIX_M2 = U64(0x94D049BB133111EB)
_ONE = U64(1)
_DOUBLE_SCALE = float(2.0**-53)


@njit(cache=True, nogil=True)
def splitmix64(state):
    """Advance a 1-element uint64 splitmix64 state and return the next value."""
    state[0] = state[0] + _SPLITMIX_GAMMA
    z = state[0]
    z = (z ^ (z >> U64(30))) * _SPLITMIX_M1
    z = (z ^ (z >> U64(27))) * _SPLITMIX_M2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def seed_state(state, seed):
    """Fill a 4-word xoshiro256++ state from a 64-bit seed via splitmix64."""
    sm = np.empty(1, np.uint64)
    sm[0] = U64(seed)
    for i in range(4):
        state[i] = splitmix64(sm)


@njit(cache=True, nogil=True)
def next_u64(state):
    """One xoshiro256++ step: returns a uint64 and advances the 4-word state."""
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    tmp = s0 + s3
    result = ((tmp << U64(23)) | (tmp >> U64(41))) + s0
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << U64(45)) | (s3 >> U64(19))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def next_double(state):
    """Uniform double in [0, 1) from the top 53 bits of one draw."""
    return float(next_u64(state) >> U64(11)) * _DOUBLE_SCALE


@njit(cache=True, nogil=True)
def randbelow(state, n):
    """Uniform integer in [0, n) by masked rejection; consumes no draw for n <= 1."""
    if n <= 1:
        return 0
    m = U64(n - 1)
    mask = m
    mask |= mask >> U64(1)
    mask |= mask >> U64(2)
    mask |= mask >> U64(4)
    mask |= mask >> U64(8)
    mask |= mask >> U64(16)
    mask |= mask >> U64(32)
    while True:
        r = next_u64(state) & mask
        if r <= m:
            return np.int64(r)


@njit(cache=True, nogil=True)
def coin_spin(state):
    """Fair +/-1 from the low bit of one draw (tie-break rule shared by all engines)."""
    if next_u64(state) & _ONE == _ONE:
        return np.int8(1)
    return np.int8(-1)


class Xoshiro256(object):
    """Python-level handle on the package generator; wraps the compiled primitives."""

    def __init__(self, seed: int):
        self.state = np.empty(4, np.uint64)
        seed_state(self.state, np.uint64(seed & 0xFFFFFFFFFFFFFFFF))

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self) -> float:
        return float(next_double(self.state))

    def randbelow(self, n: int) -> int:
        return int(randbelow(self.state, n))

    def coin_spin(self) -> int:
        return int(coin_spin(self.state))


def derive_seed(master_seed: int, *parts) -> int:
    """Derive a 64-bit sub-stream seed from a master seed and context parts.

    blake2b over the decimal master seed and each part separated by 0x1f;
    stable across platforms and Python versions.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "little")


def derive_stream_seed(master_seed: int, context: str, trial_index: int) -> int:
    """Per-trial stream seed: hash(master_seed, context, trial_index)."""
    return derive_seed(master_seed, context, trial_index)


def trial_seeds(master_seed: int, context: str, trials: int, start: int = 0) -> np.ndarray:
    """Vector of per-trial stream seeds for trial indices start..start+trials-1."""
    out = np.empty(trials, np.uint64)
    for k in range(trials):
        out[k] = derive_stream_seed(master_seed, context, start + k)
    return out
