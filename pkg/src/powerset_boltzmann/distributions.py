"""Seedable random stream and the elementary laws consumed by the samplers.

Every draw function accepts an optional ``size``: ``None`` returns a Python
scalar, anything else returns a numpy array of independent draws. Batched
draws are what keep the sampler loop fast; the scalar form is kept for
readability at call sites that need one value.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterDomainError

_U64 = 1 << 64
_I64_MAX = (1 << 63) - 1
# slack tolerated above 1 for probabilities produced by floating point
PROB_SLACK = 1e-12


class RandomStream:
    """A PCG64 stream keyed by a 64-bit seed.

    PCG64 is numpy's default bit generator; its output for a given seed is
    fixed by published reference vectors, so runs reproduce across platforms.
    A stream is single-owner: do not draw from one stream in two threads.
    """

    def __init__(self, seed: int = 42):
        seed = int(seed)
        if not 0 <= seed < _U64:
            raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def random(self, size=None):
        """Uniform doubles in [0, 1)."""
        return self.generator.random(size)

    def __repr__(self):
        return f"RandomStream(seed={self.seed})"


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ParameterDomainError(f"{name} must be finite, got {value}")


def poisson_draw(lam: float, rng: RandomStream, size=None):
    """Poisson(lam) variates.

    Delegates to numpy, which uses the exact multiplication method below
    lam = 10 and Hoermann's transformed rejection (PTRS) above; there is no
    normal approximation anywhere.
    """
    lam = float(lam)
    _check_finite("lambda", lam)
    if lam < 0:
        raise ParameterDomainError(f"lambda must be non-negative, got {lam}")
    if lam == 0.0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    out = rng.generator.poisson(lam, size)
    return int(out) if size is None else out


def geometric_draw(z: float, rng: RandomStream, size=None):
    """Geometric variates on {0, 1, 2, ...} with P(n) = (1 - z) z**n.

    Inversion: n = floor(log(U) / log(z)) with U uniform on (0, 1].
    """
    z = float(z)
    if not 0.0 <= z < 1.0:
        raise ParameterDomainError(f"geometric parameter z must lie in [0, 1), got {z}")
    if z == 0.0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    log_z = math.log(z)
    if size is None:
        u = 1.0 - rng.generator.random()
        return int(math.log(u) // log_z)
    u = 1.0 - rng.generator.random(size)
    return np.floor(np.log(u) / log_z).astype(np.int64)


def geom_dot_draw(z: float, rng: RandomStream, size=None):
    """Size-biased geometric variates: P(n) = n z**(n-1) (1 - z)**2 for n >= 1.

    Drawn as 1 + G1 + G2 with G1, G2 independent geometric(z); the
    convolution of the two geometric laws gives exactly (k+1) z**k (1-z)**2.
    """
    z = float(z)
    if not 0.0 < z < 1.0:
        raise ParameterDomainError(f"Geom-dot parameter z must lie in (0, 1), got {z}")
    if size is None:
        return 1 + geometric_draw(z, rng) + geometric_draw(z, rng)
    return 1 + geometric_draw(z, rng, size) + geometric_draw(z, rng, size)


def _clamp_probability(p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0 + PROB_SLACK):
        raise ParameterDomainError(f"probability outside [0, 1]: {p}")
    return np.minimum(arr, 1.0)


def bernoulli_draw(p, rng: RandomStream, size=None):
    """Bernoulli(p) trials; ``p`` may be a scalar or an array of probabilities."""
    prob = _clamp_probability(p)
    if size is None and prob.ndim == 0:
        return bool(rng.generator.random() < prob)
    if size is None:
        size = prob.shape
    return rng.generator.random(size) < prob


def _big_uniform(k: int, rng: RandomStream) -> int:
    # rejection on the smallest power of two >= k; exact for any k
    nbits = (k - 1).bit_length()
    nwords = -(-nbits // 64)
    mask = (1 << nbits) - 1
    while True:
        words = rng.generator.integers(0, _U64, size=nwords, dtype=np.uint64, endpoint=False)
        value = 0
        for w in words:
            value = (value << 64) | int(w)
        value &= mask
        if value < k:
            return value


def uniform_rank_draw(k, rng: RandomStream, size=None):
    """Uniform integers in [0, k).

    ``k`` may be an arbitrarily large Python int (word counts grow like k**n)
    or, in batch form, an integer array of per-draw upper bounds.
    """
    if isinstance(k, np.ndarray):
        if k.size and k.min() < 1:
            raise ParameterDomainError("uniform_rank_draw needs every k >= 1")
        return rng.generator.integers(0, k)
    k = int(k)
    if k < 1:
        raise ParameterDomainError(f"uniform_rank_draw needs k >= 1, got {k}")
    if k <= _I64_MAX:
        if size is None:
            return int(rng.generator.integers(0, k))
        return rng.generator.integers(0, k, size=size)
    if size is None:
        return _big_uniform(k, rng)
    return np.array([_big_uniform(k, rng) for _ in range(int(np.prod(size)))], dtype=object).reshape(size)
