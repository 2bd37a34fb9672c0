"""Deterministic random number generation: splitmix64-seeded PCG32 streams.

Every stochastic stage (dataset shuffling, bootstrap sampling, per-node
feature subsampling, SGD epoch shuffles) draws from a PCG32 stream so a
given seed reproduces results bit-for-bit on any platform.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_PCG_MULT = 6364136223846793005
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Tiny 64-bit generator, used only to expand seeds into PCG32 state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


class Pcg32:
    """PCG-XSH-RR 64/32 with the reference seeding sequence."""

    def __init__(self, initstate: int, initseq: int):
        self._state = 0
        self._inc = (((initseq & _MASK64) << 1) | 1) & _MASK64
        self.next_u32()
        self._state = (self._state + initstate) & _MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & _MASK32

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), bias-free via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def next_float(self) -> float:
        """Uniform in [0, 1) with 32 bits of resolution."""
        return self.next_u32() / 4294967296.0


def pcg32_stream(seed: int, stream: int) -> Pcg32:
    """Independent generator for (seed, stream).

    Streams are what make parallel and serial training identical: stream k
    depends only on (seed, k), never on how many values other streams drew.
    """
    mixer = SplitMix64((seed ^ ((stream + 1) * _GOLDEN)) & _MASK64)
    return Pcg32(mixer.next_u64(), mixer.next_u64())


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit child seed for composite trainers (e.g. cascade stages)."""
    return SplitMix64((seed ^ ((index + 1) * _GOLDEN)) & _MASK64).next_u64()
