"""Portable deterministic RNG for the verification loop.

splitmix64 with FNV-1a seeding: both are fixed published algorithms with
known test vectors, so any reimplementation in another language can
reproduce the exact sample sequence bit for bit.
"""

from __future__ import annotations

import struct
from typing import List

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def pair_stream_seed(rng_seed: int, pair_id: str) -> int:
    """Seed for one pair's sample stream: FNV-1a over seed bytes then pair id."""
    return fnv1a64(struct.pack("<q", rng_seed) + pair_id.encode("utf-8"))


class SplitMix64:
    """The splitmix64 generator (Steele/Lea/Flood mixing constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_below(self, n: int) -> int:
        """Uniform-ish draw in [0, n); modulo bias is irrelevant at 64 bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def sample_distinct(self, n: int, k: int) -> List[int]:
        """k distinct indices from range(n), in draw order."""
        if k > n:
            raise ValueError("cannot draw more distinct indices than available")
        out: List[int] = []
        seen = set()
        while len(out) < k:
            idx = self.next_below(n)
            if idx not in seen:
                seen.add(idx)
                out.append(idx)
        return out
