"""Test-side statistics built on scipy, independent of the package's own chi-square code."""

import math

import numpy as np
from scipy import stats

SEEDS = (1, 2, 3)
ALPHA = 1e-3


def pmf_gof(draws, pmf, support):
    """Chi-square p-value of integer draws against ``pmf`` on ``support`` plus one tail cell."""
    draws = np.asarray(draws)
    n = draws.size
    probs = np.array([pmf(k) for k in support])
    counts = np.array([(draws == k).sum() for k in support], dtype=float)
    # impossible values must never be drawn; they carry no chi-square cell
    impossible = probs == 0
    if counts[impossible].any():
        return 0.0
    probs, counts = probs[~impossible], counts[~impossible]
    tail_p = 1.0 - probs.sum()
    tail_c = n - counts.sum()
    if tail_p * n >= 5:
        probs = np.append(probs, tail_p)
        counts = np.append(counts, tail_c)
    else:
        probs[-1] += tail_p
        counts[-1] += tail_c
    # pool sparse cells from the right
    while probs[-1] * n < 5 and probs.size > 2:
        probs[-2] += probs[-1]
        counts[-2] += counts[-1]
        probs, counts = probs[:-1], counts[:-1]
    return stats.chisquare(counts, probs * n).pvalue


def two_of_three(check, seeds=SEEDS):
    """True when ``check(seed)`` holds for at least two of the seeds."""
    return sum(bool(check(s)) for s in seeds) >= 2


def within_se(observed_rate, p, n, k=4.0):
    return abs(observed_rate - p) < k * math.sqrt(p * (1 - p) / n)
