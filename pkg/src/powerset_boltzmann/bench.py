"""Wall-clock timing of the samplers."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .distributions import RandomStream
from .tuning import RejectionConfig, sample_with_rejection


@dataclass
class Timing:
    mean_ms: float
    stddev_ms: float
    p10_ms: float
    p90_ms: float
    mean_attempts: float
    repeats: int


def time_sampler(structure, params, config: RejectionConfig, rng: RandomStream, repeats: int = 100,
                 warmup: int = 3) -> Timing:
    """Time ``repeats`` accepted draws; only the sampling call is inside the clock."""
    for _ in range(warmup):
        sample_with_rejection(structure, params, config, rng)
    times = np.empty(repeats)
    attempts = np.empty(repeats)
    for i in range(repeats):
        t0 = time.perf_counter()
        _, attempts[i] = sample_with_rejection(structure, params, config, rng)
        times[i] = (time.perf_counter() - t0) * 1e3
    return Timing(
        float(times.mean()),
        float(times.std(ddof=1)) if repeats > 1 else 0.0,
        float(np.percentile(times, 10)),
        float(np.percentile(times, 90)),
        float(attempts.mean()),
        repeats,
    )
