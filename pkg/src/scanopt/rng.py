"""Small deterministic random streams.

Simulation needs one independent stream per decision so that parallel
and sequential runs agree bit for bit.  Streams are splitmix64
generators keyed by (session seed, stream index); construction is a few
integer mixes, so making millions of them is cheap.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Stream:
    """splitmix64 generator producing uniforms in [0, 1)."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (2.0**-53)


def derive_stream(seed: int, index: int) -> Stream:
    """Stream ``index`` of the family rooted at ``seed``."""
    return Stream(_mix((_mix(seed & _MASK) + index * _GAMMA) & _MASK))
