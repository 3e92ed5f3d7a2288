"""Seedable splitmix64 stream used for boundary stimulation.

splitmix64 (Vigna, 2015; public domain) was picked over library generators
because runs must be bit-reproducible across platforms and library versions.
The generator is counter-based: output k is mix(seed + k*GOLDEN), so the
vectorised fallback backend can draw a whole batch with numpy and land on
exactly the same values as the compiled kernel's one-at-a-time loop.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# 2**-53, so a 53-bit draw maps to a double in [0, 1)
_TO_DOUBLE = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """The splitmix64 output function on a 64-bit counter value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic uniform stream; state is a bare 64-bit counter.

    The kernels advance the counter themselves and hand it back, so `state`
    is public on purpose.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TO_DOUBLE

    def skip(self, n: int) -> None:
        """Advance the stream by n draws without producing output."""
        self.state = (self.state + n * GOLDEN) & MASK64
