"""Deterministic pseudo-random number generation for reproducible runs.

The generator is SplitMix64: a single 64-bit word of state advanced by the
golden-gamma increment 0x9E3779B97F4A7C15 and finalized with the
Stafford "variant 13" mixer (the update used by java.util.SplittableRandom).
It produces identical streams on every platform and Python build, so any
run that starts from the same seed is bit-for-bit reproducible.

`split` derives an independent child generator; simulations give each
playout its own child so playout i never depends on how many draws
playout i-1 consumed.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream over a 64-bit state word."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        """Advance the state and return the next 64-bit output word."""
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), bias-free via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Largest multiple of bound that fits in 64 bits; rejecting draws at
        # or above it removes the modulo bias.
        limit = _MASK64 + 1 - ((_MASK64 + 1) % bound)
        while True:
            draw = self.next_uint64()
            if draw < limit:
                return draw % bound

    def weighted(self, weights) -> int:
        """Index drawn with probability weights[i] / sum(weights)."""
        total = 0
        for w in weights:
            if w <= 0:
                raise ValueError("weights must be positive")
            total += w
        draw = self.below(total)
        acc = 0
        for i, w in enumerate(weights):
            acc += w
            if draw < acc:
                return i
        raise AssertionError("unreachable: draw below total")

    def chance(self, numerator: int, denominator: int) -> bool:
        """True with probability numerator/denominator."""
        return self.below(denominator) < numerator

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def split(self) -> "SplitMix64":
        """Derive an independent child generator."""
        return SplitMix64(self.next_uint64())
