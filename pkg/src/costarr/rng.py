"""Counter-based random numbers built on the SplitMix64 mixer.

Every variate is a pure function of ``(seed, stream, index)``, so any slice of
a stream can be regenerated independently and the output does not depend on
how work is split across threads or on the host platform.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_TWO_NEG_53 = 2.0 ** -53


def mix64(z):
    """SplitMix64 output function (wrapping uint64 arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_key(seed: int, stream: int) -> np.uint64:
    """Derive the per-stream key; distinct streams give unrelated sequences."""
    with np.errstate(over="ignore"):
        k = mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + GOLDEN)
        k = mix64(k ^ mix64(np.uint64(stream & 0xFFFFFFFFFFFFFFFF) * GOLDEN + GOLDEN))
    return np.uint64(k)


def raw(seed: int, stream: int, index) -> np.ndarray:
    """uint64 outputs for the given counter indices.

    Equivalent to stepping a SplitMix64 state initialised to the stream key:
    the ``i``-th output is ``mix64(key + (i + 1) * GOLDEN)``.
    """
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(stream_key(seed, stream) + (idx + np.uint64(1)) * GOLDEN)


def uniform(seed: int, stream: int, index) -> np.ndarray:
    """Uniform float64 in [0, 1) with 53 random bits."""
    return (raw(seed, stream, index) >> _S11).astype(np.float64) * _TWO_NEG_53


def normal(seed: int, stream: int, index) -> np.ndarray:
    """Standard normal variates via Box-Muller.

    Variate ``i`` consumes counters ``2i`` and ``2i + 1`` and uses only the
    cosine branch, so each variate is independent of its neighbours' indices.
    """
    idx = np.asarray(index, dtype=np.uint64)
    u1 = 1.0 - uniform(seed, stream, idx * np.uint64(2))  # (0, 1]
    u2 = uniform(seed, stream, idx * np.uint64(2) + np.uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


class CounterStream:
    """Convenience wrapper that hands out consecutive blocks of one stream."""

    def __init__(self, seed: int, stream: int):
        self.seed = seed
        self.stream = stream
        self._next = 0

    def _take(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        idx = np.arange(self._next, self._next + n, dtype=np.uint64)
        self._next += n
        return idx

    def uniform(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = uniform(self.seed, self.stream, self._take(shape)).reshape(shape)
        return low + (high - low) * u

    def normal(self, shape, mean: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        z = normal(self.seed, self.stream, self._take(shape)).reshape(shape)
        return mean + sigma * z

    def integers(self, shape, high: int) -> np.ndarray:
        """Integers in [0, high) by scaling a uniform (bias < 2**-40 for small high)."""
        u = uniform(self.seed, self.stream, self._take(shape)).reshape(shape)
        return np.minimum((u * high).astype(np.int64), high - 1)

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of ``range(n)`` (argsort of uniform keys)."""
        keys = uniform(self.seed, self.stream, self._take((n,)))
        return np.argsort(keys, kind="stable")
