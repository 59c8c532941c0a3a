"""Seeded, platform-independent random streams.

A stream is identified by ``(seed, label)``. Draws come from a splitmix64
counter generator, so a stream can be advanced in vectorised blocks and
reproduces bit for bit on any platform with IEEE doubles. Gaussians use the
Box-Muller transform (cosine branch only).
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import InvalidParameterError

__all__ = ["Rng", "make_rng", "gaussian"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _label_hash(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


class Rng:
    """Counter-based splitmix64 stream.

    Instances are mutable (each draw advances the counter). Use
    :meth:`clone` to fork an identical copy, or :meth:`child` to derive an
    independent named sub-stream.
    """

    def __init__(self, seed: int, label: str = ""):
        if not 0 <= int(seed) <= _MASK64:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.label = label
        start = np.array([self.seed ^ _label_hash(label)], dtype=np.uint64)
        self._state = int(_mix(start)[0])

    def __repr__(self):
        return f"Rng(seed={self.seed}, label={self.label!r})"

    def clone(self) -> "Rng":
        other = Rng.__new__(Rng)
        other.seed, other.label, other._state = self.seed, self.label, self._state
        return other

    def child(self, label: str) -> "Rng":
        return Rng(self.seed, f"{self.label}/{label}")

    def next_u64(self, n: int) -> np.ndarray:
        """Return the next ``n`` raw 64-bit outputs."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        out = _mix(np.uint64(self._state) + steps * _GAMMA)
        self._state = (self._state + n * int(_GAMMA)) & _MASK64
        return out

    def uniform(self, size=None):
        """Uniform draws on the open interval (0, 1)."""
        n = 1 if size is None else int(np.prod(size))
        u = ((self.next_u64(n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, mu=0.0, sigma=1.0, size=None):
        if sigma < 0:
            raise InvalidParameterError(f"sigma must be non-negative, got {sigma}")
        n = 1 if size is None else int(np.prod(size))
        u = self.uniform((n, 2))
        z = np.sqrt(-2.0 * np.log(u[:, 0])) * np.cos(2.0 * math.pi * u[:, 1])
        if sigma == 0:
            z = np.full(n, float(mu))
        else:
            z = mu + sigma * z
        return float(z[0]) if size is None else z.reshape(size)

    def bernoulli(self, p: float, size) -> np.ndarray:
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
        return (self.uniform(size) < p).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = np.arange(n)
        if n < 2:
            return perm
        u = self.uniform(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = min(int(u[k] * (i + 1)), i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def categorical(self, probs: np.ndarray) -> np.ndarray:
        """One draw per row of a ``(n, K)`` probability matrix (inverse CDF)."""
        probs = np.atleast_2d(probs)
        cdf = np.cumsum(probs, axis=1)
        u = self.uniform(probs.shape[0])[:, None] * cdf[:, -1:]
        idx = (u >= cdf).sum(axis=1)
        return np.minimum(idx, probs.shape[1] - 1)


def make_rng(seed: int, stream_label: str) -> Rng:
    return Rng(seed, stream_label)


def gaussian(rng: Rng, mu: float, sigma: float) -> float:
    """Single draw from N(mu, sigma^2); ``sigma == 0`` returns ``mu`` exactly."""
    return rng.normal(mu, sigma)
