"""Seeded low-discrepancy sampling used by the certificate and the test batteries."""

from __future__ import annotations

import numpy as np

__all__ = ["halton", "unit_sphere"]


def _primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def _radical_inverse(indices: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(indices.shape, dtype=float)
    denom = 1.0
    idx = indices.copy()
    while idx.any():
        denom *= base
        out += (idx % base) / denom
        idx //= base
    return out


def halton(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """(count, dim) Halton points in [0, 1), randomized by a seeded shift.

    The Cranley-Patterson rotation keeps the low-discrepancy structure while
    making the sample set a deterministic function of the seed.
    """
    bases = _primes(dim)
    indices = np.arange(1, count + 1, dtype=np.int64)
    pts = np.stack([_radical_inverse(indices, b) for b in bases], axis=1)
    shift = np.random.default_rng(seed).random(dim)
    return (pts + shift) % 1.0


def unit_sphere(d: int, count: int, seed: int = 0) -> np.ndarray:
    """(count, d) deterministic sample of unit directions.

    For d = 1 this is just {+1, -1}; higher d uses seeded Gaussian directions.
    """
    if d == 1:
        reps = (count + 1) // 2
        return np.tile(np.array([[1.0], [-1.0]]), (reps, 1))[:count]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
