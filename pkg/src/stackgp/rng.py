"""Counter-based random streams.

Each stream is a Philox generator whose 128-bit key packs
``(seed, generation, stream index)``. The high word of the starting
counter carries a domain tag so that, say, tournament ``t`` and child
``t`` of the same generation never share draws. Because the key fully
determines the sequence, streams can be created and consumed in any
order or on any thread with identical results.
"""

from enum import IntEnum

import numpy as np

__all__ = ["Domain", "RngStream"]

_U32 = 1 << 32
_U64 = 1 << 64


class Domain(IntEnum):
    SELECTION = 0
    MUTATION = 1
    INIT = 2
    DATA = 3
    USER = 4


class RngStream:
    """Deterministic random stream keyed by (seed, generation, index).

    Parameters
    ----------
    seed : int
        Global run seed, ``0 <= seed < 2**64``.
    generation : int
        Generation index, ``0 <= generation < 2**32``.
    index : int
        Stream index within the generation (tournament or child number).
    domain : Domain
        Purpose tag, keeps streams with equal keys apart.
    """

    __slots__ = ("key", "domain", "_gen")

    def __init__(self, seed: int, generation: int = 0, index: int = 0,
                 domain: Domain = Domain.USER):
        for name, v, lim in (("seed", seed, _U64), ("generation", generation, _U32),
                             ("index", index, _U32)):
            if not 0 <= int(v) < lim:
                raise ValueError(f"{name}={v} outside [0, {lim})")
        self.key = (int(seed), int(generation), int(index))
        self.domain = Domain(domain)
        packed = (int(seed) << 64) | (int(generation) << 32) | int(index)
        counter = np.array([0, 0, 0, int(self.domain)], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=packed, counter=counter))

    def __repr__(self) -> str:
        return f"RngStream(key={self.key}, domain={self.domain.name})"

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return float(self._gen.uniform(low, high))

    def random(self) -> float:
        return float(self._gen.random())

    def integer(self, high: int) -> int:
        """Uniform integer in ``[0, high)``."""
        return int(self._gen.integers(0, high))

    def integers(self, high: int, size: int) -> np.ndarray:
        return self._gen.integers(0, high, size=size)

    def randoms(self, size: int) -> np.ndarray:
        return self._gen.random(size)

    def choice(self, seq):
        return seq[self.integer(len(seq))]

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)
