"""Deterministic random streams shared by the reference and compiled engines.

The ensemble harness promises byte-identical output for a given
(master seed, config) pair, independent of how agents are scheduled.  To get
that, every agent owns a private xoshiro256** stream whose state is derived
from the master seed and the agent index by a fixed splitmix64 expansion.
The same generator is implemented here in plain Python (used by the library
and the reference engine) and again inside the numba kernels; the two are
bit-compatible, which the test suite checks directly.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# 2**-53, scale for converting the top 53 bits of a draw to a double in [0, 1)
_DOUBLE_SCALE = 1.0 / (1 << 53)


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + GOLDEN_GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def substream_state(master_seed: int, index: int) -> tuple[int, int, int, int]:
    """Initial xoshiro256** state for substream `index` of `master_seed`.

    This mixing function is part of the external reproducibility contract:
    state = four successive splitmix64 outputs seeded from
    master_seed + (index + 1) * GOLDEN_GAMMA (mod 2**64).
    """
    z = (master_seed + (index + 1) * GOLDEN_GAMMA) & _MASK
    z, s0 = splitmix64(z)
    z, s1 = splitmix64(z)
    z, s2 = splitmix64(z)
    z, s3 = splitmix64(z)
    return s0, s1, s2, s3


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256StarStar:
    """xoshiro256** with the substream seeding above.

    Only the two methods the simulator needs are provided: `random()` for a
    double in [0, 1) and `randbelow(m)` for a bounded integer.  Any object
    with a compatible `random()` (e.g. `numpy.random.Generator`) can be used
    with the library API instead; this class exists for reproducibility
    across engines.
    """

    __slots__ = ("_s",)

    def __init__(self, master_seed: int, index: int = 0):
        self._s = list(substream_state(master_seed, index))

    def next_uint64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_uint64() >> 11) * _DOUBLE_SCALE

    def randbelow(self, m: int) -> int:
        # int(u * m) is exact for the m used here (m << 2**52)
        return int(self.random() * m)

    def getstate(self) -> tuple[int, int, int, int]:
        return tuple(self._s)
