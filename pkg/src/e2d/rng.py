"""Deterministic random streams for reproducible simulation.

The generator is counter-based SplitMix64: draw i of a stream with seed s is
``mix64(s + (i+1) * GOLDEN)``, so the state is exactly (seed, counter) and the
sequence depends only on the seed and the call pattern, not on platform,
architecture, or library versions. Gaussians come from the Box-Muller
transform applied to consecutive stream values.
"""
from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def derive_seed(base_seed: int, *parts: str) -> int:
    """Stable 64-bit mix of a base seed and string labels.

    Uses BLAKE2b so that adding unrelated labels never perturbs the seeds
    derived for existing ones.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(base_seed).to_bytes(8, "little", signed=False))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


class RngStream:
    """Deterministic stream with a 64-bit seed and a draw counter."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.counter = int(counter)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def clone(self) -> "RngStream":
        return RngStream(self.seed, self.counter)

    def spawn(self, label: str) -> "RngStream":
        """Independent child stream with a seed derived from (seed, label)."""
        return RngStream(derive_seed(self.seed, label))

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64(np.uint64(self.seed) + idx * _GOLDEN)

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in (0, 1]."""
        return ((self._raw(n) >> np.uint64(11)).astype(np.float64) + 1.0) * _U53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller; consumes 2*ceil(n/2) draws."""
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def choice(self, weights) -> int:
        """Sample an index from nonnegative weights summing to ~1."""
        w = np.asarray(weights, dtype=float)
        cdf = np.cumsum(w)
        u = self.uniform() * cdf[-1]
        return int(min(np.searchsorted(cdf, u), w.size - 1))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high) via rejection-free modulo (small ranges)."""
        span = high - low
        return low + int(self._raw(1)[0] % np.uint64(span))
