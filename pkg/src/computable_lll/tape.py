"""Random bit tapes and exact sampling by arithmetic decoding.

A tape stands for a point of the Cantor space of random bits.  Every draw is
tagged with the variable it is for.  :class:`RandomTape` keeps an independent
substream per variable, so the value a variable receives on its k-th draw
does not depend on when that draw happens; :class:`BitTape` ignores the tag
and hands out an explicit bit list in demand order.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from functools import lru_cache
from math import lcm

from .core import Variable

MASK64 = (1 << 64) - 1


class TapeExhausted(LookupError):
    """An explicit tape ran out of bits."""


class RandomTape:
    """Deterministic pseudorandom tape derived from a 64-bit seed.

    Bits for variable ``v`` come from a counter-mode hash of
    ``(seed, v, block)``; identical seeds give identical streams.
    """

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.cursor = 0
        self._key = self.seed.to_bytes(8, "little")
        self._streams: dict[int, list[int]] = {}  # var -> [block, buffered bits, n buffered]

    def _block(self, var: int, block: int) -> int:
        msg = var.to_bytes(16, "little", signed=True) + block.to_bytes(8, "little")
        digest = hashlib.blake2b(msg, digest_size=8, key=self._key).digest()
        return int.from_bytes(digest, "little")

    def bit(self, var: int = 0) -> int:
        state = self._streams.get(var)
        if state is None:
            state = self._streams[var] = [0, 0, 0]
        if state[2] == 0:
            state[1] = self._block(var, state[0])
            state[0] += 1
            state[2] = 64
        state[2] -= 1
        self.cursor += 1
        return (state[1] >> state[2]) & 1


class BitTape:
    """A finite, explicit tape; raises :class:`TapeExhausted` past its end."""

    def __init__(self, bits):
        self.bits = tuple(int(b) for b in bits)
        self.cursor = 0

    def bit(self, var: int = 0) -> int:
        if self.cursor >= len(self.bits):
            raise TapeExhausted(self.cursor)
        b = self.bits[self.cursor]
        self.cursor += 1
        return b


@lru_cache(maxsize=4096)
def _cells(distribution: tuple[Fraction, ...]) -> tuple[int, tuple[int, ...]]:
    # cumulative boundaries as integers over a common denominator
    den = lcm(*(p.denominator for p in distribution))
    bounds = [0]
    for p in distribution:
        bounds.append(bounds[-1] + p.numerator * (den // p.denominator))
    return den, tuple(bounds)


def sample_variable(spec: Variable, tape) -> int:
    """Draw a value of ``spec`` with its exact distribution.

    The dyadic interval ``[lo/2^k, (lo+1)/2^k)`` is refined one bit at a time
    until it fits inside a single cumulative-probability cell.
    """
    den, bounds = _cells(spec.distribution)
    n = len(bounds) - 1
    if n == 1:
        return 0
    lo, k = 0, 0
    value = 0
    while True:
        lo = (lo << 1) | tape.bit(spec.index)
        k += 1
        # cell containing the left end: largest value with bounds[value] * 2^k <= lo * den
        left = lo * den
        while value + 1 < n and bounds[value + 1] << k <= left:
            value += 1
        while bounds[value] << k > left:
            value -= 1
        if (lo + 1) * den <= bounds[value + 1] << k:
            return value
