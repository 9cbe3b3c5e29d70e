"""Deterministic random streams for generators and experiments.

Draws 53-bit uniforms from the counter-based Philox bit generator and
derives everything else with fixed textbook transforms: Box-Muller for
normals, inverse CDF for exponentials, Fisher-Yates for shuffles.  The
same (seed, path) therefore yields the same stream on every platform.
Sub-streams are independent: trial i of an experiment uses split(i).
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "philox4x64 uniforms; box-muller normals; inverse-cdf exponentials; fisher-yates shuffles"


class Rng:
    """One deterministic stream, identified by a seed and a split path."""

    algorithm = ALGORITHM

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self.path = tuple(int(i) for i in _path)
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence((self.seed,) + self.path))
        )

    def split(self, index: int) -> "Rng":
        """Independent child stream; deterministic in (seed, path, index)."""
        return Rng(self.seed, self.path + (int(index),))

    def uniform(self, n: int) -> np.ndarray:
        return self._gen.random(int(n))

    def normal(self, n: int) -> np.ndarray:
        """Standard normals via Box-Muller on uniform pairs."""
        m = (int(n) + 1) // 2
        u1 = 1.0 - self._gen.random(m)  # (0, 1], keeps log finite
        u2 = self._gen.random(m)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return z[:n]

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normal(rows * cols).reshape(rows, cols)

    def exponential_shifted(self, n: int) -> np.ndarray:
        """Rate-1 exponential minus 1: zero mean, unit variance exactly."""
        u = self._gen.random(int(n))
        return -np.log1p(-u) - 1.0

    def randint(self, low: int, high: int) -> int:
        """One integer uniform on [low, high)."""
        if high <= low:
            raise ValueError("empty range")
        j = low + int(self._gen.random() * (high - low))
        return min(j, high - 1)

    def shuffled(self, values) -> np.ndarray:
        """Fisher-Yates permutation of a copy of ``values``."""
        out = np.array(values, dtype=np.float64, copy=True)
        n = out.size
        if n < 2:
            return out
        u = self._gen.random(n - 1)
        for i in range(n - 1, 0, -1):
            j = min(int(u[n - 1 - i] * (i + 1)), i)
            out[i], out[j] = out[j], out[i]
        return out
