"""Seeded random streams derived from one master seed.

Every consumer of randomness (an agent, the fundamental, one direction of a
network link) gets its own generator keyed by a stable label, so adding or
removing one consumer never shifts the draws seen by another.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def derive_rng(seed: int, label: str, *ids: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, label, *ids)``."""
    entropy = [int(seed), _label_key(label), *(int(i) for i in ids)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


class BufferedLognormal:
    """Unit-mean lognormal draws served from a pre-filled block.

    Scalar draws from a numpy Generator are slow; message jitter needs one
    draw per message, so blocks are generated in bulk.
    """

    __slots__ = ("_rng", "_sigma", "_block", "_buf", "_pos")

    def __init__(self, rng: np.random.Generator, sigma: float, block: int = 1024):
        self._rng = rng
        self._sigma = float(sigma)
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def draw(self) -> float:
        if self._pos >= len(self._buf):
            s = self._sigma
            self._buf = self._rng.lognormal(-0.5 * s * s, s, self._block).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x
