"""Statistical suites certifying the sampler against exact oracles.

Each suite runs on several seeds and passes under a majority rule (2 of 3 by
default) with per-test significance 1e-3 or a 4-standard-error band.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import (
    chi_square_gof,
    distinct_subset_count,
    enumerate_oracle,
    indicator_covariance,
)
from .distributions import RandomStream
from .errors import ParameterDomainError
from .sampler import SampleBatch, Univariate, sample_batch
from .structures import naturals
from .tuning import RejectionConfig, calibrate_numeric, sample_many_with_rejection

ALPHA = 1e-3
SE_BAND = 4.0
MARGINAL_PARTS = range(1, 9)
COVARIANCE_PAIRS = ((1, 2), (1, 3), (2, 5))


@dataclass
class SuiteResult:
    name: str
    passed: bool
    seeds: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def majority(flags, required: int = 2) -> bool:
    return sum(bool(f) for f in flags) >= required


def marginal_check(batch: SampleBatch, z: float, parts=MARGINAL_PARTS) -> dict:
    """Inclusion frequency of each part against z**n / (1 + z**n)."""
    rows, ok = [], True
    for n in parts:
        p = z ** n / (1.0 + z ** n)
        freq = float(batch.membership(n).mean())
        se = math.sqrt(p * (1.0 - p) / batch.count)
        dev = (freq - p) / se
        ok &= abs(dev) < SE_BAND
        rows.append({"part": n, "expected": p, "observed": freq, "z_score": dev})
    return {"passed": bool(ok), "parts": rows}


def covariance_check(batch: SampleBatch, pairs=COVARIANCE_PAIRS) -> dict:
    rows, ok = [], True
    for a, b in pairs:
        cov, se = indicator_covariance(batch.membership(a), batch.membership(b))
        passed = abs(cov) < SE_BAND * se
        ok &= passed
        rows.append({"pair": [a, b], "covariance": cov, "standard_error": se})
    return {"passed": bool(ok), "pairs": rows}


def oracle_check(batch: SampleBatch, z: float, cap: int = 6):
    """Chi-square of the sub-cap pattern against the exhaustive oracle.

    Samples with a part above ``cap`` are dropped; inclusion events above the
    cap are independent of those below, so the conditional law is the oracle.
    """
    oracle = enumerate_oracle(naturals(), Univariate(z), cap)
    above = np.bincount(batch.sample_ids[batch.levels > cap], minlength=batch.count) > 0
    low = batch.levels <= cap
    # naturals: element i of the oracle is the part i + 1
    bits = np.left_shift(1, batch.levels[low] - 1)
    masks = np.bincount(batch.sample_ids[low], weights=bits, minlength=batch.count).astype(np.int64)
    observed = np.bincount(masks[~above], minlength=oracle.probs.size)
    return chi_square_gof(observed, oracle.probs, name=f"oracle cap={cap}")


def _distinct_partitions(n: int, largest=None) -> list:
    largest = n if largest is None else largest
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, largest), 0, -1):
        out.extend((first,) + rest for rest in _distinct_partitions(n - first, first - 1))
    return out


def uniformity_check(samples, n: int):
    """Chi-square of exact-size samples against the uniform law on distinct partitions of n."""
    shapes = _distinct_partitions(n)
    if len(shapes) != distinct_subset_count(naturals(), n):
        raise AssertionError("partition enumeration disagrees with the counting oracle")
    index = {s: i for i, s in enumerate(shapes)}
    observed = np.zeros(len(shapes), dtype=np.int64)
    for s in samples:
        observed[index[tuple(s.levels())]] += 1
    return chi_square_gof(observed, np.full(len(shapes), 1.0 / len(shapes)), ids=[list(s) for s in shapes],
                          name=f"exact n={n}")


def run_suites(seeds=(1, 2, 3), *, marginal_count=200_000, oracle_count=1_000_000, exact_count=60_000,
               exact_n=8, z=0.5, acceptance_scale=1.0, suites=None) -> list:
    """Run the selected suites; ``suites`` defaults to all four."""
    for name, value in (("marginal_count", marginal_count), ("oracle_count", oracle_count),
                        ("exact_count", exact_count)):
        if value < 2:
            raise ParameterDomainError(f"{name} must be at least 2, got {value}")
    wanted = set(suites or ("marginal", "covariance", "oracle", "uniformity"))
    structure = naturals()
    params = Univariate(z)
    results = []

    if wanted & {"marginal", "covariance"}:
        marg, cov = [], []
        for seed in seeds:
            batch = sample_batch(structure, params, RandomStream(seed), marginal_count,
                                 acceptance_scale=acceptance_scale)
            marg.append({"seed": seed, **marginal_check(batch, z)})
            cov.append({"seed": seed, **covariance_check(batch)})
        if "marginal" in wanted:
            results.append(SuiteResult("marginal", majority(r["passed"] for r in marg), marg))
        if "covariance" in wanted:
            results.append(SuiteResult("covariance", majority(r["passed"] for r in cov), cov))

    if "oracle" in wanted:
        rows = []
        for seed in seeds:
            batch = sample_batch(structure, params, RandomStream(seed), oracle_count,
                                 acceptance_scale=acceptance_scale)
            report = oracle_check(batch, z)
            rows.append({"seed": seed, "passed": report.passed(ALPHA), "report": report.to_dict()})
        results.append(SuiteResult("oracle", majority(r["passed"] for r in rows), rows))

    if "uniformity" in wanted:
        rows = []
        z_exact = calibrate_numeric(structure, exact_n, 1e-3)
        config = RejectionConfig.exact(exact_n)
        for seed in seeds:
            accepted = sample_many_with_rejection(structure, Univariate(z_exact), config, RandomStream(seed),
                                                  exact_count, acceptance_scale=acceptance_scale)
            report = uniformity_check([s for s, _ in accepted], exact_n)
            rows.append({"seed": seed, "passed": report.passed(ALPHA), "report": report.to_dict(),
                         "mean_attempts": float(np.mean([a for _, a in accepted]))})
        results.append(SuiteResult("uniformity", majority(r["passed"] for r in rows), rows))
    return results
