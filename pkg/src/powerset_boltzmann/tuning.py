"""Choosing the Boltzmann parameter and controlling the output size.

Two ways to pick ``z``: closed-form asymptotics for the two worked examples
(strict partitions, strict partitions into squares), and numerical inversion
of the exact mean size, which for a powerset is the convergent series
``sum_n n a_n w_n / (1 + w_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .distributions import RandomStream
from .errors import (
    NonConvergenceError,
    ParameterDomainError,
    RetriesExhaustedError,
    UnreachableTargetError,
)
from .sampler import (
    CHUNK_DRAWS,
    Bivariate,
    BoltzmannParams,
    Univariate,
    check_params,
    dominating_rate_total,
    log1p_ratio as _log1p_ratio,
    sample_batch,
    sample_free,
)
from .structures import CombStructure, ConstantBound, ExponentialBound

PARTITION_C = math.sqrt(12.0) / math.pi
GAMMA_3_2 = math.sqrt(math.pi) / 2.0
MAX_SERIES_TERMS = 200_000_000
MAX_BISECTION_STEPS = 200
EXP_MARGIN = 1e-12


# --- asymptotic calibration ---------------------------------------------

def calibrate_partitions(target: float) -> float:
    """z ~ exp(-1 / sqrt(c E(N))) with c = sqrt(12) / pi, for strict partitions.

    This is the published asymptotic formula, kept verbatim. Its exact mean
    size is about 0.907 * target (see ``calibrate_numeric`` for exact tuning).
    """
    target = float(target)
    if not (math.isfinite(target) and target >= 1.0):
        raise ParameterDomainError(f"target size must be >= 1, got {target}")
    return math.exp(-1.0 / math.sqrt(PARTITION_C * target))


def predicted_loop_partitions(target: float) -> float:
    """Mean number of dominating ticks, sqrt(c E(N)), under ``calibrate_partitions``."""
    return math.sqrt(PARTITION_C * target)


def calibrate_squares(target_size: float, target_length: float) -> Bivariate:
    """(z1, z2) for strict partitions into squares with given mean size and mean length."""
    if not (target_size > 0 and target_length > 0):
        raise ParameterDomainError(
            f"targets must be positive, got size={target_size}, length={target_length}"
        )
    kappa = target_length ** 3 / target_size
    z1 = math.exp(-target_length / (2.0 * target_size))
    z2 = math.sqrt(kappa / 2.0) / GAMMA_3_2
    return Bivariate(z1, z2)


def predicted_loop_squares(target_size: float, target_length: float) -> float:
    return math.sqrt(2.0 * target_size * target_length) / GAMMA_3_2


# --- exact moments ----------------------------------------------------------

def _log_bound_array(bound, levels):
    if isinstance(bound, ConstantBound):
        return np.full(levels.shape, math.log(bound.a_bar))
    if isinstance(bound, ExponentialBound):
        return math.log(bound.b) + levels * math.log(bound.c)
    with np.errstate(divide="ignore"):
        return np.log(bound.b * levels)


def _moment_series(structure, params, power, rel_tol, log_terms=False):
    """sum_n n**power a_n w_n / (1 + w_n), truncated with a tail bound.

    With ``log_terms`` the summand is a_n ln(1 + w_n) instead (power 0 only).
    Terms are dominated by v(n) = n**power bound(n) w_n. Along the support
    levels the ratio v(next) / v(current) is non-increasing, so once it drops
    below 1 the remaining tail is at most v(next) / (1 - ratio).
    """
    check_params(structure, params)
    if isinstance(params, Univariate) and params.z == 0.0:
        # only level 0 has non-zero weight (w_0 = 1)
        if power:
            return 0.0
        return structure.count(0) * (math.log(2.0) if log_terms else 0.5)
    if isinstance(params, Bivariate):
        log_z, log_shift = math.log(params.z1), math.log(params.z2)
    else:
        log_z, log_shift = math.log(params.z), 0.0
    bound = structure.bound

    def log_dominating(levels):
        with np.errstate(divide="ignore"):
            log_poly = power * np.log(levels) if power else 0.0
        return log_poly + _log_bound_array(bound, levels) + log_shift + levels * log_z

    total, start, chunk = 0.0, 0, 4096
    while True:
        int_levels = structure.support(start, chunk)
        levels = int_levels.astype(float)
        log_w = log_shift + levels * log_z
        w = np.exp(log_w)
        bw = np.exp(_log_bound_array(bound, levels) + log_w)
        if log_terms:
            terms = structure.ratio_array(int_levels) * bw * _log1p_ratio(w)
        else:
            terms = levels ** power * structure.ratio_array(int_levels) * bw / (1.0 + w)
        total += math.fsum(terms)
        start += chunk
        lv_next = log_dominating(structure.support(start, 2).astype(float))
        log_r = lv_next[1] - lv_next[0]
        if lv_next[0] == -math.inf:
            return total
        if log_r < 0.0:
            tail = math.exp(lv_next[0]) / -math.expm1(log_r)
            if tail == 0.0 or tail <= rel_tol * total:
                return total
        if start > MAX_SERIES_TERMS:
            raise NonConvergenceError(
                f"series did not reach relative tolerance {rel_tol} within {MAX_SERIES_TERMS} terms"
            )
        chunk = min(chunk * 2, 1 << 20)


def expected_size(structure: CombStructure, params: BoltzmannParams, rel_tol: float = 1e-9) -> float:
    """Mean total size E(N) = sum_n n a_n w_n / (1 + w_n), to relative accuracy ``rel_tol``."""
    return _moment_series(structure, params, 1, rel_tol)


def expected_length(structure: CombStructure, params: BoltzmannParams, rel_tol: float = 1e-9) -> float:
    """Mean number of parts, sum_n a_n w_n / (1 + w_n)."""
    return _moment_series(structure, params, 0, rel_tol)


def log_generating_function(structure: CombStructure, params: BoltzmannParams, rel_tol: float = 1e-12) -> float:
    """ln C(z) = sum_n a_n ln(1 + w_n): the exact Poisson rate the thinning never computes.

    Used only by tests and oracles.
    """
    return _moment_series(structure, params, 0, rel_tol, log_terms=True)


def _size_upper_bound(structure, z):
    # sum_n n bound(n) z**n in closed form
    bound = structure.bound
    if isinstance(bound, ConstantBound):
        return bound.a_bar * z / (1.0 - z) ** 2
    if isinstance(bound, ExponentialBound):
        q = bound.c * z
        return bound.b * q / (1.0 - q) ** 2
    return bound.b * z * (1.0 + z) / (1.0 - z) ** 3


def calibrate_numeric(structure: CombStructure, target: float, rel_tol: float = 1e-6) -> float:
    """Bisection for z such that expected_size is within ``rel_tol * target`` of ``target``."""
    target = float(target)
    if not (math.isfinite(target) and target > 0):
        raise ParameterDomainError(f"target must be positive, got {target}")
    if isinstance(structure.bound, ExponentialBound):
        z_max = (1.0 - EXP_MARGIN) / structure.bound.c
        if _size_upper_bound(structure, z_max) < target:
            raise UnreachableTargetError(
                f"{structure.name}: mean size {target:g} lies beyond the radius c*z < 1"
            )
    else:
        z_max = 1.0
    series_tol = min(rel_tol * 1e-3, 1e-9)
    lo, hi = 0.0, z_max
    for _ in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        value = expected_size(structure, Univariate(mid), series_tol)
        if abs(value - target) <= rel_tol * target:
            return mid
        if value < target:
            lo = mid
        else:
            hi = mid
    else:
        raise NonConvergenceError(f"bisection did not converge in {MAX_BISECTION_STEPS} steps")
    if hi == z_max:
        raise UnreachableTargetError(f"{structure.name}: mean size {target:g} not reached below z = {z_max}")
    raise NonConvergenceError(f"bisection stalled at z = {lo} without reaching tolerance {rel_tol}")


# --- size control -------------------------------------------------------------

DEFAULT_MAX_ATTEMPTS = {"free": 1, "approx": 10_000, "exact": 1_000_000}


@dataclass(frozen=True)
class RejectionConfig:
    """Free sampling, or repeat until the size is in a window / equal to a target.

    The approximate window ``[(1 - eps) n, (1 + eps) n]`` is taken on integers as
    ``ceil((1 - eps) n) .. floor((1 + eps) n)``.
    """

    mode: str = "free"
    target: Optional[int] = None
    epsilon: Optional[float] = None
    max_attempts: Optional[int] = None

    def __post_init__(self):
        if self.mode not in DEFAULT_MAX_ATTEMPTS:
            raise ParameterDomainError(f"unknown rejection mode {self.mode!r}")
        if self.mode != "free" and not (self.target is not None and self.target >= 1):
            raise ParameterDomainError(f"{self.mode} mode needs a positive integer target")
        if self.mode == "approx" and not (self.epsilon is not None and 0 < self.epsilon < 1):
            raise ParameterDomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_attempts is None:
            object.__setattr__(self, "max_attempts", DEFAULT_MAX_ATTEMPTS[self.mode])
        elif self.max_attempts < 1:
            raise ParameterDomainError(f"max_attempts must be >= 1, got {self.max_attempts}")

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def approximate(cls, target: int, epsilon: float, max_attempts: Optional[int] = None):
        return cls("approx", int(target), float(epsilon), max_attempts)

    @classmethod
    def exact(cls, target: int, max_attempts: Optional[int] = None):
        return cls("exact", int(target), None, max_attempts)

    def window(self) -> tuple:
        """Inclusive integer range of accepted sizes (None for free mode)."""
        if self.mode == "free":
            return None
        if self.mode == "exact":
            return self.target, self.target
        lo = math.ceil((1.0 - self.epsilon) * self.target - 1e-9)
        hi = math.floor((1.0 + self.epsilon) * self.target + 1e-9)
        return lo, hi


def rejection_stream(structure: CombStructure, params: BoltzmannParams, config: RejectionConfig,
                     rng: RandomStream, *, acceptance_scale: float = 1.0) -> Iterator[tuple]:
    """Endless stream of (accepted sample, attempts spent on it).

    Free draws are generated in batches of growing size; the first draws that
    land in the window are accepted in order, so each accepted sample has the
    law of the sequential repeat-until-accepted loop.
    """
    lo, hi = config.window()
    lam_bar = dominating_rate_total(structure, params)
    batch_cap = max(1, int(CHUNK_DRAWS // max(lam_bar, 1.0)))
    batch, attempts = 1, 0
    while True:
        n = min(batch, config.max_attempts - attempts)
        drawn = sample_batch(structure, params, rng, n, acceptance_scale=acceptance_scale)
        sizes = drawn.sizes()
        hits = np.flatnonzero((sizes >= lo) & (sizes <= hi))
        prev = -1
        for j in hits.tolist():
            yield drawn.sample(j), attempts + j - prev
            attempts, prev = 0, j
        attempts += n - 1 - prev
        if attempts >= config.max_attempts:
            raise RetriesExhaustedError(attempts)
        batch = min(batch * 2, batch_cap)


def sample_with_rejection(structure: CombStructure, params: BoltzmannParams, config: RejectionConfig,
                          rng: RandomStream, *, acceptance_scale: float = 1.0) -> tuple:
    """(sample, attempts) under the configured size-control scheme."""
    if config.mode == "free":
        return sample_free(structure, params, rng, acceptance_scale=acceptance_scale), 1
    stream = rejection_stream(structure, params, config, rng, acceptance_scale=acceptance_scale)
    return next(stream)


def sample_many_with_rejection(structure, params, config, rng, count, *, acceptance_scale=1.0) -> list:
    """``count`` accepted (sample, attempts) pairs."""
    if config.mode == "free":
        return [(s, 1) for s in sample_batch(structure, params, rng, count,
                                             acceptance_scale=acceptance_scale).samples()]
    stream = rejection_stream(structure, params, config, rng, acceptance_scale=acceptance_scale)
    return [next(stream) for _ in range(count)]
