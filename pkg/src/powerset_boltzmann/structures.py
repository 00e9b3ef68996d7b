"""Combinatorial classes described by a counting sequence and an unranking rule.

A class ``A`` is known to the samplers only through ``a_n`` (how many elements
have size ``n``), a way to name the ``i``-th element of size ``n``, and a
growth bound on ``a_n``. The bound decides which dominating level law the
sampler uses.
"""

from __future__ import annotations

import math
import string
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

import numpy as np

from .errors import BoundViolationError, ParameterDomainError

DEFAULT_HORIZON = 10_000
_RATIO_SLACK = 1e-12


class PartLabel(NamedTuple):
    """Element of ``A`` addressed by its size (``level``) and its rank in that level."""

    level: int
    rank: int


@dataclass(frozen=True)
class ConstantBound:
    a_bar: float

    def __post_init__(self):
        if not self.a_bar > 0:
            raise ParameterDomainError(f"a_bar must be positive, got {self.a_bar}")

    def value(self, n):
        return self.a_bar

    def log_value(self, n):
        return math.log(self.a_bar)


@dataclass(frozen=True)
class ExponentialBound:
    """a_n <= b * c**n."""

    b: float
    c: float

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise ParameterDomainError(f"b and c must be positive, got b={self.b}, c={self.c}")

    def value(self, n):
        return self.b * self.c ** n

    def log_value(self, n):
        return math.log(self.b) + n * math.log(self.c)


@dataclass(frozen=True)
class LinearBound:
    """a_n <= b * n, which forces a_0 = 0."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ParameterDomainError(f"b must be positive, got {self.b}")

    def value(self, n):
        return self.b * n

    def log_value(self, n):
        return math.log(self.b * n) if n > 0 else -math.inf


Bound = ConstantBound | ExponentialBound | LinearBound


def bound_ratio(bound: Bound, a: int, n: int) -> float:
    """a / bound(n), robust to counts far beyond float range."""
    if a == 0:
        return 0.0
    try:
        v = bound.value(n)
        if v == 0:
            return math.inf
        return a / v
    except OverflowError:
        return math.exp(math.log(a) - bound.log_value(n))


class Violation(NamedTuple):
    level: int
    count: int
    bound: float


@dataclass(frozen=True)
class CombStructure:
    """Immutable description of a class ``A``.

    ``count_array`` and ``ratio_array_fn`` are optional vectorised versions of
    ``count_fn`` and of ``a_n / bound(n)``; when absent the per-level callbacks
    are evaluated once per distinct level. ``support_fn(start, count)`` lists
    the levels with index ``start .. start + count - 1`` among a superset of
    the levels where a_n > 0, in increasing order with non-decreasing gaps;
    by default every level is listed.
    """

    name: str
    count_fn: Callable[[int], int]
    unrank_fn: Callable[[int, int], Any]
    bound: Bound
    count_array: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)
    ratio_array_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)
    support_fn: Optional[Callable[[int, int], np.ndarray]] = field(default=None, repr=False, compare=False)

    def count(self, n: int) -> int:
        a = self.count_fn(int(n))
        if a < 0:
            raise ParameterDomainError(f"{self.name}: negative count a_{n} = {a}")
        return a

    def unrank(self, n: int, i: int):
        if not 0 <= i < self.count(n):
            raise ParameterDomainError(f"{self.name}: rank {i} outside level {n}")
        return self.unrank_fn(n, i)

    def decode(self, label: PartLabel):
        return self.unrank(label.level, label.rank)

    def ratio(self, n: int) -> float:
        return bound_ratio(self.bound, self.count(n), n)

    def ratio_array(self, levels: np.ndarray) -> np.ndarray:
        if self.ratio_array_fn is not None:
            return np.asarray(self.ratio_array_fn(levels), dtype=float)
        uniq, inverse = np.unique(levels, return_inverse=True)
        vals = np.array([self.ratio(int(n)) for n in uniq], dtype=float)
        return vals[inverse]

    def support(self, start: int, count: int) -> np.ndarray:
        if self.support_fn is not None:
            return np.asarray(self.support_fn(start, count), dtype=np.int64)
        return np.arange(start, start + count, dtype=np.int64)

    def counts_for(self, levels: np.ndarray) -> np.ndarray:
        """Exact a_n per entry of ``levels``; dtype object once counts leave int64."""
        if self.count_array is not None:
            return np.asarray(self.count_array(levels), dtype=np.int64)
        uniq, inverse = np.unique(levels, return_inverse=True)
        vals = [self.count(int(n)) for n in uniq]
        if all(v <= np.iinfo(np.int64).max for v in vals):
            return np.array(vals, dtype=np.int64)[inverse]
        return np.array(vals, dtype=object)[inverse]


def validate_bound(structure: CombStructure, horizon: int = DEFAULT_HORIZON) -> list[Violation]:
    """Levels ``0..horizon`` where the counting sequence exceeds its bound."""
    if horizon < 1:
        raise ParameterDomainError(f"horizon must be >= 1, got {horizon}")
    bound = structure.bound
    violations = []
    for n in range(horizon + 1):
        a = structure.count(n)
        if a == 0:
            continue
        try:
            v = bound.value(n)
            exceeded = a > v if isinstance(v, int) else a > v * (1 + _RATIO_SLACK)
        except OverflowError:
            v = math.inf
            exceeded = bound_ratio(bound, a, n) > 1 + _RATIO_SLACK
        if exceeded:
            violations.append(Violation(n, a, v))
    return violations


def make_structure(name, count_fn, unrank_fn, bound, *, check=True, horizon=DEFAULT_HORIZON,
                   count_array=None, ratio_array_fn=None, support_fn=None) -> CombStructure:
    """Build a user-defined structure, checking its bound up to ``horizon`` unless ``check=False``."""
    s = CombStructure(name, count_fn, unrank_fn, bound, count_array, ratio_array_fn, support_fn)
    if check:
        violations = validate_bound(s, horizon)
        if violations:
            first = violations[0]
            raise BoundViolationError(
                f"{name}: a_{first.level} = {first.count} exceeds bound {first.bound} "
                f"({len(violations)} violation(s) up to n = {horizon})",
                violations,
            )
    return s


# --- builtins -------------------------------------------------------------
# Structures are immutable, so each builtin is built and bound-checked once.

def _isqrt_array(levels: np.ndarray) -> np.ndarray:
    # float estimate, then exact integer correction
    n = np.asarray(levels, dtype=np.int64)
    r = np.floor(np.sqrt(np.maximum(n, 0).astype(float))).astype(np.int64)
    r = np.where(r * r > n, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= n, r + 1, r)
    return r


def _is_square(n: int) -> bool:
    return n >= 1 and math.isqrt(n) ** 2 == n


_DIGITS = string.digits + string.ascii_lowercase


def _word(n: int, i: int, k: int):
    digits = []
    for _ in range(n):
        i, d = divmod(i, k)
        digits.append(d)
    digits.reverse()
    if k <= len(_DIGITS):
        return "".join(_DIGITS[d] for d in digits)
    return tuple(digits)


@lru_cache(maxsize=None)
def naturals(min_size: int = 1, *, check: bool = True) -> CombStructure:
    """One element of each size n >= min_size (strict partitions when min_size = 1)."""
    if min_size not in (0, 1):
        raise ParameterDomainError(f"naturals min_size must be 0 or 1, got {min_size}")

    def count(n):
        return 1 if n >= min_size else 0

    def count_array(levels):
        return (np.asarray(levels) >= min_size).astype(np.int64)

    return make_structure(
        "naturals" if min_size == 1 else "naturals0",
        count,
        lambda n, i: n,
        ConstantBound(1),
        check=check,
        count_array=count_array,
        ratio_array_fn=lambda levels: count_array(levels).astype(float),
    )


@lru_cache(maxsize=None)
def squares(*, check: bool = True) -> CombStructure:
    """One element for each positive perfect square."""

    def count_array(levels):
        n = np.asarray(levels, dtype=np.int64)
        r = _isqrt_array(n)
        return ((n >= 1) & (r * r == n)).astype(np.int64)

    return make_structure(
        "squares",
        lambda n: 1 if _is_square(n) else 0,
        lambda n, i: n,
        ConstantBound(1),
        check=check,
        count_array=count_array,
        ratio_array_fn=lambda levels: count_array(levels).astype(float),
        support_fn=lambda start, count: np.arange(start + 1, start + count + 1, dtype=np.int64) ** 2,
    )


@lru_cache(maxsize=None)
def words(k: int, *, check: bool = True) -> CombStructure:
    """Words over a k-letter alphabet; a_n = k**n, bounded by 1 * k**n."""
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise ParameterDomainError(f"alphabet size must be an integer >= 2, got {k}")
    k = int(k)
    return make_structure(
        f"words:{k}",
        lambda n: k ** n,
        lambda n, i: _word(n, i, k),
        ExponentialBound(1, k),
        check=check,
        ratio_array_fn=lambda levels: np.ones(np.shape(levels)),
    )


@lru_cache(maxsize=None)
def pointed_naturals(*, check: bool = True) -> CombStructure:
    """Atoms of size n carrying one of n marks; a_n = n, bounded by 1 * n."""

    def count_array(levels):
        return np.maximum(np.asarray(levels, dtype=np.int64), 0)

    return make_structure(
        "pointed",
        lambda n: max(n, 0),
        lambda n, i: (n, i),
        LinearBound(1),
        check=check,
        count_array=count_array,
        ratio_array_fn=lambda levels: (np.asarray(levels) >= 1).astype(float),
    )


def make_builtin(spec: str, **params) -> CombStructure:
    """Builtin structure by name.

    Accepted names: ``naturals`` (``min_size`` 0 or 1), ``naturals0``,
    ``squares``, ``words`` (``k``), ``words:k`` and ``pointed`` /
    ``pointed_naturals``.
    """
    name, _, arg = spec.partition(":")
    if arg and name != "words":
        raise ParameterDomainError(f"{name!r} takes no argument, got {spec!r}")
    if name == "naturals":
        return naturals(params.get("min_size", 1))
    if name == "naturals0":
        return naturals(0)
    if name == "squares":
        return squares()
    if name == "words":
        k = params.get("k", arg or None)
        if k is None:
            raise ParameterDomainError("words needs an alphabet size, e.g. 'words:2'")
        try:
            k = int(k)
        except ValueError:
            raise ParameterDomainError(f"bad alphabet size {k!r}") from None
        return words(k)
    if name in ("pointed", "pointed_naturals"):
        return pointed_naturals()
    raise ParameterDomainError(f"unknown structure {spec!r}")
