"""Young diagrams, limit shapes, and exact oracles for checking the sampler.

Nothing in this module calls the sampler. The oracles compute the Boltzmann
law directly from the product form of the powerset generating function, so
they can be used to judge sampler output without trusting it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ParameterDomainError
from .sampler import BoltzmannParams, PowersetSample, level_weight
from .structures import CombStructure, PartLabel
from .tuning import log_generating_function

VERSHIK_SCALE = math.sqrt(12.0) / math.pi
MAX_ORACLE_ELEMENTS = 24
MAX_COUNT_HORIZON = 1000


# --- Young diagrams -------------------------------------------------------

@dataclass(frozen=True)
class YoungDiagram:
    """Y(x) = number of parts of size >= x, stored at its jump points.

    ``levels`` are the distinct part sizes in increasing order and
    ``heights[j] = Y(levels[j])``; Y is constant on (levels[j-1], levels[j]]
    and vanishes after the last level.
    """

    levels: np.ndarray
    heights: np.ndarray
    total_size: int
    total_length: int

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.levels, x, side="left")
        padded = np.append(self.heights, 0)
        out = padded[idx]
        return out if out.ndim else int(out)

    def integral(self) -> int:
        if self.levels.size == 0:
            return 0
        widths = np.diff(np.concatenate(([0], self.levels)))
        return int(np.dot(widths, self.heights))

    def jump_points(self) -> np.ndarray:
        """(x, y) corners of the step function, both values at every jump."""
        if self.levels.size == 0:
            return np.array([[0.0, 0.0]])
        after = np.append(self.heights[1:], 0)
        pts = np.empty((2 * self.levels.size + 1, 2))
        pts[0] = (0.0, self.heights[0])
        pts[1::2, 0] = self.levels
        pts[1::2, 1] = self.heights
        pts[2::2, 0] = self.levels
        pts[2::2, 1] = after
        return pts


def young_diagram(sample) -> YoungDiagram:
    """Diagram of a sample (a PowersetSample or an iterable of part sizes)."""
    if isinstance(sample, PowersetSample):
        sizes = [p.level for p in sample.parts]
    else:
        sizes = [p.level if isinstance(p, PartLabel) else int(p) for p in sample]
    arr = np.asarray(sizes, dtype=np.int64)
    levels, counts = np.unique(arr, return_counts=True)
    heights = np.cumsum(counts[::-1])[::-1]
    return YoungDiagram(levels, heights.astype(np.int64), int(arr.sum()), int(arr.size))


def rescale_diagram(diagram: YoungDiagram, scheme: str = "sqrt_size", *, expected_size=None,
                    expected_length=None) -> np.ndarray:
    """Corner points of the rescaled diagram as an (k, 2) array.

    ``sqrt_size`` divides both axes by the square root of the realised size.
    ``bivariate`` maps Y to Y(2 E_N x / E_M) / E_M with the given mean size
    E_N and mean length E_M.
    """
    pts = diagram.jump_points()
    if scheme == "sqrt_size":
        if diagram.total_size <= 0:
            raise ParameterDomainError("cannot rescale an empty diagram by sqrt(size)")
        return pts / math.sqrt(diagram.total_size)
    if scheme == "bivariate":
        if not (expected_size and expected_size > 0 and expected_length and expected_length > 0):
            raise ParameterDomainError("bivariate rescaling needs positive expected size and length")
        scaled = pts.copy()
        scaled[:, 0] *= expected_length / (2.0 * expected_size)
        scaled[:, 1] /= expected_length
        return scaled
    raise ParameterDomainError(f"unknown rescaling scheme {scheme!r}")


_erfc = np.frompyfunc(math.erfc, 1, 1)


def limit_shape(kind: str, x):
    """Deterministic limit of the rescaled diagram.

    ``vershik``: strict partitions, the solution y of
    exp(pi y / sqrt 12) = 1 + exp(-pi x / sqrt 12).
    ``gamma_survival``: partitions into distinct squares, the survival function
    of the gamma law with shape 1/2, which equals erfc(sqrt x).
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise ParameterDomainError("limit shapes are defined for x >= 0")
    if kind == "vershik":
        out = VERSHIK_SCALE * np.log1p(np.exp(-xa / VERSHIK_SCALE))
    elif kind == "gamma_survival":
        out = np.asarray(_erfc(np.sqrt(xa)), dtype=float)
    else:
        raise ParameterDomainError(f"unknown limit shape {kind!r}")
    return out if out.ndim else float(out)


def sup_distance(curve, kind: str) -> float:
    """Largest vertical gap between curve points and the limit shape."""
    pts = np.asarray(curve, dtype=float).reshape(-1, 2)
    return float(np.max(np.abs(pts[:, 1] - limit_shape(kind, pts[:, 0]))))


def curve_csv_rows(curve) -> list:
    return [f"{x:.12g},{y:.12g}" for x, y in np.asarray(curve, dtype=float).reshape(-1, 2)]


def write_curve_csv(curve, path) -> None:
    with open(path, "w") as fh:
        fh.write("x,y\n")
        fh.write("\n".join(curve_csv_rows(curve)) + "\n")


# --- exact oracles --------------------------------------------------------

@dataclass(frozen=True)
class OracleDistribution:
    """Exact law of the sample restricted to parts of level <= cap.

    Outcome ``mask`` has bit ``i`` set when ``elements[i]`` is present.
    """

    elements: tuple
    probs: np.ndarray

    def subset(self, mask: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.elements) if mask >> i & 1)

    def mask_of(self, parts: Iterable) -> int:
        index = {e: i for i, e in enumerate(self.elements)}
        return sum(1 << index[p] for p in parts)

    def size_of(self, mask: int) -> int:
        return sum(e.level for i, e in enumerate(self.elements) if mask >> i & 1)


def enumerate_oracle(structure: CombStructure, params: BoltzmannParams, level_cap: int) -> OracleDistribution:
    """Brute-force Boltzmann law over all subsets of the elements of size <= level_cap."""
    elements, probs_in = [], []
    for n in range(level_cap + 1):
        a = structure.count(n)
        if len(elements) + a > MAX_ORACLE_ELEMENTS:
            raise CapacityError(f"more than {MAX_ORACLE_ELEMENTS} elements up to level {level_cap}")
        w = level_weight(params, n)
        for i in range(a):
            elements.append(PartLabel(n, i))
            probs_in.append(w / (1.0 + w))
    probs = np.ones(1)
    for p in probs_in:
        probs = np.concatenate((probs * (1.0 - p), probs * p))
    return OracleDistribution(tuple(elements), probs)


def distinct_subset_count(structure: CombStructure, n: int) -> int:
    """Number of finite subsets of A with total size exactly n."""
    if not 0 <= n <= MAX_COUNT_HORIZON:
        raise ParameterDomainError(f"n must lie in [0, {MAX_COUNT_HORIZON}], got {n}")
    dp = [0] * (n + 1)
    dp[0] = 2 ** structure.count(0)
    for k in range(1, n + 1):
        a = structure.count(k)
        if a == 0:
            continue
        new = dp[:]
        for j in range(1, min(a, n // k) + 1):
            c = math.comb(a, j)
            shift = j * k
            for s in range(shift, n + 1):
                new[s] += c * dp[s - shift]
        dp = new
    return dp[n]


def exact_size_distribution(structure: CombStructure, params: BoltzmannParams, max_size: int) -> np.ndarray:
    """P(N = s) for s = 0..max_size, from the product form of C(z)."""
    poly = np.zeros(max_size + 1)
    poly[0] = 1.0
    for k in range(1, max_size + 1):
        a = structure.count(k)
        if a == 0:
            continue
        w = level_weight(params, k)
        new = poly.copy()
        for j in range(1, min(a, max_size // k) + 1):
            coef = math.comb(a, j) * w ** j
            new[j * k:] += coef * poly[:max_size + 1 - j * k]
        poly = new
    # level-0 elements do not move the size; their factor cancels
    log_c = log_generating_function(structure, params) - structure.count(0) * math.log1p(level_weight(params, 0))
    return poly * math.exp(-log_c)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))


# --- chi-square -------------------------------------------------------------

def _gamma_q(a: float, x: float) -> float:
    """Regularised upper incomplete gamma Q(a, x): series below a + 1, Lentz continued fraction above."""
    if x <= 0.0:
        return 1.0
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        term = total = 1.0 / a
        ap = a
        for _ in range(10_000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return max(0.0, 1.0 - total * math.exp(log_prefactor))
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(log_prefactor) * h


def chi2_sf(stat: float, dof: int) -> float:
    """Survival function of the chi-square law with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ParameterDomainError(f"degrees of freedom must be >= 1, got {dof}")
    return _gamma_q(dof / 2.0, stat / 2.0)


@dataclass
class VerificationReport:
    cells: list
    chi_square_stat: float
    degrees_of_freedom: int
    p_value: float
    sample_count: int
    name: str = ""
    extra: dict = field(default_factory=dict)

    def passed(self, alpha: float = 1e-3) -> bool:
        return self.p_value > alpha

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _merge_cells(ids, probs, observed, min_expected, total):
    order = np.argsort(probs, kind="stable")
    pool_ids, pool_p, pool_o = [], 0.0, 0
    keep = []
    for pos, i in enumerate(order):
        if probs[i] * total < min_expected or (pool_ids and pool_p * total < min_expected):
            pool_ids.append(ids[i])
            pool_p += probs[i]
            pool_o += observed[i]
        else:
            keep.extend(order[pos:])
            break
    cells = [(ids[i], float(probs[i]), int(observed[i])) for i in sorted(keep)]
    if pool_ids:
        label = pool_ids[0] if len(pool_ids) == 1 else f"merged[{len(pool_ids)}]"
        cells.append((label, float(pool_p), int(pool_o)))
    return cells


def chi_square_gof(observed: Sequence[int], expected: Sequence[float], ids=None, *,
                   min_expected: float = 5.0, name: str = "") -> VerificationReport:
    """Pearson goodness-of-fit of counts against cell probabilities.

    Cells whose expected count is below ``min_expected`` are pooled, smallest
    first, until the pool itself reaches ``min_expected``.
    """
    obs = np.asarray(observed, dtype=np.int64)
    probs = np.asarray(expected, dtype=float)
    if obs.shape != probs.shape:
        raise ParameterDomainError("observed and expected must have the same length")
    if np.any(probs <= 0):
        raise ParameterDomainError("expected probabilities must be positive")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ParameterDomainError(f"expected probabilities sum to {probs.sum()}, not 1")
    probs = probs / probs.sum()
    total = int(obs.sum())
    if total <= 0:
        raise ParameterDomainError("no observations")
    ids = list(range(len(obs))) if ids is None else list(ids)
    cells = _merge_cells(ids, probs, obs, min_expected, total)
    if len(cells) < 2:
        raise ParameterDomainError("need at least two cells after merging")
    p = np.array([c[1] for c in cells])
    o = np.array([c[2] for c in cells], dtype=float)
    e = p * total
    stat = float(np.sum((o - e) ** 2 / e))
    dof = len(cells) - 1
    return VerificationReport(cells, stat, dof, chi2_sf(stat, dof), total, name)


def chi_square_homogeneity(counts_a: Sequence[int], counts_b: Sequence[int], *,
                           min_expected: float = 5.0, name: str = "") -> VerificationReport:
    """Two-sample chi-square test that two count vectors come from one law."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    n_a, n_b = a.sum(), b.sum()
    pooled = (a + b) / (n_a + n_b)
    cells, acc_a, acc_b, acc_p = [], 0.0, 0.0, 0.0
    # pool trailing cells until the smaller sample expects min_expected
    for i in range(len(a)):
        acc_a += a[i]
        acc_b += b[i]
        acc_p += pooled[i]
        if acc_p * min(n_a, n_b) >= min_expected:
            cells.append((acc_a, acc_b, acc_p))
            acc_a = acc_b = acc_p = 0.0
    if acc_p > 0 and cells:
        last = cells.pop()
        cells.append((last[0] + acc_a, last[1] + acc_b, last[2] + acc_p))
    stat = 0.0
    for ca, cb, cp in cells:
        ea, eb = cp * n_a, cp * n_b
        stat += (ca - ea) ** 2 / ea + (cb - eb) ** 2 / eb
    dof = len(cells) - 1
    report_cells = [(i, c[2], int(c[0])) for i, c in enumerate(cells)]
    return VerificationReport(report_cells, stat, dof, chi2_sf(stat, dof), int(n_a + n_b), name)


# --- covariance ---------------------------------------------------------------

def indicator_covariance(x, y) -> tuple:
    """Sample covariance (divisor n) of two indicator vectors and its standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n == 0 or y.size != n:
        raise ParameterDomainError("need two non-empty indicator vectors of equal length")
    prod = (x - x.mean()) * (y - y.mean())
    cov = float(prod.mean())
    se = float(prod.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return cov, se


def empirical_covariance(samples: Sequence[PowersetSample], label_a, label_b) -> tuple:
    """(covariance, standard error) of the membership indicators of two labels."""
    label_a, label_b = PartLabel(*label_a), PartLabel(*label_b)
    if label_a == label_b:
        raise ParameterDomainError("labels must be distinct")
    x = [label_a in s.parts for s in samples]
    y = [label_b in s.parts for s in samples]
    return indicator_covariance(x, y)
