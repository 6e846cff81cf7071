"""Seeded, position-addressable random streams.

Generator version ``pcg64-1``: numpy's PCG64 bit generator seeded through
``SeedSequence(seed)``. Every draw consumes whole 64-bit outputs, so the
stream position is an exact count of raw outputs and ``RngStream(seed, pos)``
resumes mid-stream via ``PCG64.advance``.

Uniform doubles use the top 53 bits of each output. Normals use Box-Muller,
two outputs per pair of samples.

Child streams: ``child_seed = SeedSequence([seed, index]).generate_state(1, uint64)[0]``.
"""

from __future__ import annotations

import numpy as np

GENERATOR_VERSION = "pcg64-1"

_MASK64 = (1 << 64) - 1
_INV53 = 1.0 / (1 << 53)


def derive_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence([int(seed) & _MASK64, int(index) & _MASK64])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """Single-owner random stream. Split with :meth:`child` for concurrent use."""

    def __init__(self, seed: int, position: int = 0):
        if position < 0:
            raise ValueError("position must be non-negative")
        self.seed = int(seed) & _MASK64
        self._bits = np.random.PCG64(np.random.SeedSequence(self.seed))
        if position:
            self._bits.advance(position)
        self.position = int(position)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, position={self.position})"

    def raw(self, n: int) -> np.ndarray:
        out = self._bits.random_raw(n)
        self.position += n
        return np.asarray(out, dtype=np.uint64)

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        """Uniform doubles on [low, high)."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * _INV53
        u = low + (high - low) * u
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def integers(self, n: int, size=None):
        """Integers in [0, n)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        u = self.uniform(size)
        k = np.minimum(np.floor(np.asarray(u) * n), n - 1).astype(np.int64)
        return int(k) if size is None else k

    def normal(self, size) -> np.ndarray:
        """Standard normal samples by Box-Muller."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape))
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(2, pairs)
        r = np.sqrt(-2.0 * np.log1p(-u[0]))  # 1 - u lies in (0, 1]
        theta = 2.0 * np.pi * u[1]
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[:n].reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n)."""
        out = np.arange(n)
        if n < 2:
            return out
        u = self.uniform(n - 1)
        for i in range(n - 1, 0, -1):
            j = min(int(u[n - 1 - i] * (i + 1)), i)
            out[i], out[j] = out[j], out[i]
        return out

    def child(self, index: int) -> RngStream:
        return RngStream(derive_seed(self.seed, index))
