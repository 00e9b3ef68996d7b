"""Oracle-free Boltzmann sampler for powersets by thinned Poisson occupancy.

Each element ``l`` of size ``n`` must end up in the output independently with
probability ``w_n / (1 + w_n)`` where ``w_n = z**n`` (or ``z2 * z1**n``).
That is the same as asking whether a Poisson clock of rate ``ln(1 + w_n)``
ticks at least once. All clocks of a level together tick at rate
``a_n ln(1 + w_n)``, which is dominated by ``bound(n) * w_n``. The dominating
rates sum in closed form (``lambda_bar``), so we draw a Poisson number of
dominating ticks, give each tick a level from the normalised dominating
rates, and keep it with probability equal to the ratio of the two rates.
Nothing here evaluates the generating function.

Bound variant -> (lambda_bar, level law):

* constant ``a_bar``      -> ``a_bar / (1 - z)``,   geometric(z)
* constant, bivariate     -> ``a_bar z2 / (1 - z1)``, geometric(z1)
* exponential ``b c**n``  -> ``b / (1 - c z)``,     geometric(c z)
* linear ``b n``          -> ``b z / (1 - z)**2``,  size-biased geometric(z)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from .distributions import (
    RandomStream,
    geom_dot_draw,
    geometric_draw,
    poisson_draw,
    uniform_rank_draw,
)
from .errors import BoundViolationError, DivergentRateError, ParameterDomainError
from .structures import CombStructure, ConstantBound, ExponentialBound, LinearBound, PartLabel

SMALL_WEIGHT = 1e-8
ACCEPT_SLACK = 1e-12
# dominating draws generated per vectorised chunk in batch mode
CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True)
class Univariate:
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.z) and 0.0 <= self.z < 1.0):
            raise ParameterDomainError(f"z must lie in [0, 1), got {self.z}")


@dataclass(frozen=True)
class Bivariate:
    """Weight ``z2 * z1**n`` per part: z1 marks size, z2 marks the number of parts."""

    z1: float
    z2: float

    def __post_init__(self):
        if not (math.isfinite(self.z1) and 0.0 < self.z1 < 1.0):
            raise ParameterDomainError(f"z1 must lie in (0, 1), got {self.z1}")
        if not (math.isfinite(self.z2) and self.z2 > 0.0):
            raise ParameterDomainError(f"z2 must be positive, got {self.z2}")


BoltzmannParams = Union[Univariate, Bivariate]


@dataclass(frozen=True)
class PowersetSample:
    """A finite set of part labels."""

    parts: frozenset

    @classmethod
    def of(cls, parts: Iterable) -> "PowersetSample":
        return cls(frozenset(PartLabel(int(n), int(i)) for n, i in parts))

    @cached_property
    def size(self) -> int:
        return sum(p.level for p in self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def sorted_parts(self) -> list:
        return sorted(self.parts)

    def levels(self) -> list:
        return sorted((p.level for p in self.parts), reverse=True)

    def __contains__(self, label):
        return label in self.parts


# --- per-level quantities -------------------------------------------------

def level_weight(params: BoltzmannParams, n: int) -> float:
    """Inclusion odds w_n of one element of size n (0**0 taken as 1)."""
    if isinstance(params, Bivariate):
        return params.z2 * params.z1 ** n
    return params.z ** n


def _weight_array(params: BoltzmannParams, levels: np.ndarray) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    if isinstance(params, Bivariate):
        return np.exp(math.log(params.z2) + levels * math.log(params.z1))
    if params.z == 0.0:
        return (levels == 0).astype(float)
    # underflows cleanly to 0 for n >> 1 / (1 - z)
    return np.exp(levels * math.log(params.z))


def log1p_ratio(w):
    """ln(1 + w) / w, with the limit 1 at w = 0 and a series below 1e-8."""
    w = np.asarray(w, dtype=float)
    small = w < SMALL_WEIGHT
    safe = np.where(small, 1.0, w)
    out = np.where(small, 1.0 - w / 2.0 + w * w / 3.0, np.log1p(safe) / safe)
    return out if out.ndim else float(out)


def check_params(structure: CombStructure, params: BoltzmannParams) -> None:
    bound = structure.bound
    if isinstance(params, Bivariate):
        if not isinstance(bound, ConstantBound):
            raise ParameterDomainError("bivariate weights need a constant-bounded structure")
        return
    if isinstance(bound, ExponentialBound) and bound.c * params.z >= 1.0:
        raise DivergentRateError(
            f"{structure.name}: c*z = {bound.c * params.z} >= 1, dominating rate diverges"
        )


def dominating_rate_total(structure: CombStructure, params: BoltzmannParams) -> float:
    """Total rate lambda_bar of the dominating clocks (mean number of loop turns)."""
    check_params(structure, params)
    bound = structure.bound
    if isinstance(params, Bivariate):
        return bound.a_bar * params.z2 / (1.0 - params.z1)
    z = params.z
    if isinstance(bound, ConstantBound):
        return bound.a_bar / (1.0 - z)
    if isinstance(bound, ExponentialBound):
        return bound.b / (1.0 - bound.c * z)
    if isinstance(bound, LinearBound):
        return bound.b * z / (1.0 - z) ** 2
    raise TypeError(f"unknown bound {bound!r}")


def dominating_level_draw(structure: CombStructure, params: BoltzmannParams, rng: RandomStream, size=None):
    """Level of one dominating tick, drawn from the normalised dominating rates."""
    check_params(structure, params)
    if isinstance(params, Bivariate):
        return geometric_draw(params.z1, rng, size)
    bound = structure.bound
    if isinstance(bound, ExponentialBound):
        return geometric_draw(bound.c * params.z, rng, size)
    if isinstance(bound, LinearBound):
        return geom_dot_draw(params.z, rng, size)
    return geometric_draw(params.z, rng, size)


def acceptance_prob(structure: CombStructure, params: BoltzmannParams, n: int) -> float:
    """Thinning probability (a_n / bound(n)) * ln(1 + w_n) / w_n for a tick at level n."""
    p = structure.ratio(n) * log1p_ratio(level_weight(params, n))
    if p > 1.0 + ACCEPT_SLACK:
        raise BoundViolationError(
            f"{structure.name}: acceptance probability {p} > 1 at level n = {n}; "
            f"a_{n} = {structure.count(n)} exceeds its declared bound"
        )
    return min(p, 1.0)


def _acceptance_array(structure, params, levels, scale=1.0):
    p = structure.ratio_array(levels) * log1p_ratio(_weight_array(params, levels))
    if p.size and p.max() > 1.0 + ACCEPT_SLACK:
        n = int(levels[np.argmax(p)])
        raise BoundViolationError(
            f"{structure.name}: acceptance probability {p.max()} > 1 at level n = {n}; "
            f"a_{n} exceeds its declared bound"
        )
    p = np.minimum(p, 1.0)
    if scale != 1.0:
        p = p * scale
    return p


def _draw_ranks(structure, levels, rng):
    counts = structure.counts_for(levels)
    if counts.dtype != object:
        return uniform_rank_draw(counts, rng)
    return np.array([uniform_rank_draw(int(k), rng) for k in counts], dtype=object)


def _thinned_ticks(structure, params, rng, n_ticks, scale):
    """Dominating ticks -> (keep mask, levels, ranks of kept ticks)."""
    levels = np.asarray(dominating_level_draw(structure, params, rng, n_ticks), dtype=np.int64)
    keep = rng.random(n_ticks) < _acceptance_array(structure, params, levels, scale)
    kept = levels[keep]
    return keep, kept, _draw_ranks(structure, kept, rng)


def sample_free(structure: CombStructure, params: BoltzmannParams, rng: RandomStream,
                *, acceptance_scale: float = 1.0) -> PowersetSample:
    """One Boltzmann-distributed element of PSet(A).

    ``acceptance_scale`` multiplies every thinning probability; it exists only
    so the verification suites can be shown to catch a biased sampler.
    """
    lam_bar = dominating_rate_total(structure, params)
    if lam_bar == 0.0:
        return PowersetSample(frozenset())
    m_bar = poisson_draw(lam_bar, rng)
    if m_bar == 0:
        return PowersetSample(frozenset())
    _, kept, ranks = _thinned_ticks(structure, params, rng, m_bar, acceptance_scale)
    # set insertion makes repeated ticks of one element idempotent
    return PowersetSample(frozenset(map(PartLabel, kept.tolist(), ranks.tolist())))


@dataclass(frozen=True)
class SampleBatch:
    """``count`` independent samples stored as flat, de-duplicated arrays.

    Row ``j`` of (sample_ids, levels, ranks) says that label (level, rank)
    belongs to sample ``sample_ids[j]``. Rows are sorted by sample, then level,
    then rank.
    """

    count: int
    sample_ids: np.ndarray
    levels: np.ndarray
    ranks: np.ndarray

    def sizes(self) -> np.ndarray:
        if self.ranks.dtype == object or self.levels.size == 0:
            out = np.zeros(self.count, dtype=np.int64)
            np.add.at(out, self.sample_ids, self.levels)
            return out
        return np.bincount(self.sample_ids, weights=self.levels, minlength=self.count).astype(np.int64)

    def lengths(self) -> np.ndarray:
        return np.bincount(self.sample_ids, minlength=self.count)

    def membership(self, level: int, rank: int = 0) -> np.ndarray:
        """Boolean indicator, per sample, of the label (level, rank)."""
        hit = (self.levels == level) & (self.ranks == rank)
        out = np.zeros(self.count, dtype=bool)
        out[self.sample_ids[hit]] = True
        return out

    def sample(self, j: int) -> PowersetSample:
        lo, hi = np.searchsorted(self.sample_ids, [j, j + 1])
        return PowersetSample(frozenset(map(PartLabel, self.levels[lo:hi].tolist(), self.ranks[lo:hi].tolist())))

    def samples(self) -> list:
        bounds = np.searchsorted(self.sample_ids, np.arange(self.count + 1))
        lv, rk = self.levels.tolist(), self.ranks.tolist()
        return [
            PowersetSample(frozenset(map(PartLabel, lv[bounds[j]:bounds[j + 1]], rk[bounds[j]:bounds[j + 1]])))
            for j in range(self.count)
        ]


def _dedup(sids, levels, ranks):
    if sids.size == 0:
        return sids, levels, ranks
    if ranks.dtype == object:
        rows = sorted(set(zip(sids.tolist(), levels.tolist(), ranks.tolist())))
        s, l, r = zip(*rows)
        return np.array(s, dtype=np.int64), np.array(l, dtype=np.int64), np.array(r, dtype=object)
    order = np.lexsort((ranks, levels, sids))
    sids, levels, ranks = sids[order], levels[order], ranks[order]
    first = np.ones(sids.size, dtype=bool)
    first[1:] = (sids[1:] != sids[:-1]) | (levels[1:] != levels[:-1]) | (ranks[1:] != ranks[:-1])
    return sids[first], levels[first], ranks[first]


def sample_batch(structure: CombStructure, params: BoltzmannParams, rng: RandomStream, count: int,
                 *, acceptance_scale: float = 1.0) -> SampleBatch:
    """``count`` independent free samples, vectorised across samples.

    Same law as calling :func:`sample_free` ``count`` times; only the order in
    which the stream is consumed differs.
    """
    if count < 0:
        raise ParameterDomainError(f"count must be non-negative, got {count}")
    lam_bar = dominating_rate_total(structure, params)
    empty = np.zeros(0, dtype=np.int64)
    if lam_bar == 0.0 or count == 0:
        return SampleBatch(count, empty, empty, empty)
    per_chunk = max(1, int(CHUNK_DRAWS // max(lam_bar, 1.0)))
    parts_s, parts_l, parts_r = [], [], []
    for start in range(0, count, per_chunk):
        n_samples = min(per_chunk, count - start)
        m_bar = poisson_draw(lam_bar, rng, size=n_samples)
        total = int(m_bar.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(start, start + n_samples, dtype=np.int64), m_bar)
        keep, kept, ranks = _thinned_ticks(structure, params, rng, total, acceptance_scale)
        parts_s.append(owner[keep])
        parts_l.append(kept)
        parts_r.append(ranks)
    if not parts_s:
        return SampleBatch(count, empty, empty, empty)
    ranks = parts_r[0] if len(parts_r) == 1 else np.concatenate(parts_r)
    sids, levels, ranks = _dedup(np.concatenate(parts_s), np.concatenate(parts_l), ranks)
    return SampleBatch(count, sids, levels, ranks)
