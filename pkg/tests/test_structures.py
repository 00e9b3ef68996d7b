import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerset_boltzmann.errors import BoundViolationError, ParameterDomainError
from powerset_boltzmann.structures import (
    ConstantBound,
    ExponentialBound,
    LinearBound,
    bound_ratio,
    make_builtin,
    make_structure,
    naturals,
    pointed_naturals,
    squares,
    validate_bound,
    words,
)

BUILTINS = ["naturals", "naturals0", "squares", "words:2", "words:3", "pointed"]


def test_naturals_counts():
    s = naturals(1)
    assert s.count(0) == 0 and s.count(7) == 1
    assert s.unrank(7, 0) == 7
    assert naturals(0).count(0) == 1


def test_squares_counts():
    s = squares()
    assert s.count(9) == 1 and s.count(10) == 0 and s.count(0) == 0 and s.count(1) == 1


def test_words_unrank():
    s = words(2)
    assert s.count(3) == 8
    assert s.unrank(3, 5) == "101"
    assert [s.unrank(2, i) for i in range(4)] == ["00", "01", "10", "11"]
    assert s.unrank(0, 0) == ""


def test_words_large_alphabet_uses_tuples():
    s = words(40, check=False)
    assert s.unrank(2, 41) == (1, 1)


def test_pointed_counts():
    s = pointed_naturals()
    assert [s.count(n) for n in range(5)] == [0, 1, 2, 3, 4]
    assert s.unrank(3, 2) == (3, 2)


@pytest.mark.parametrize("spec", ["naturals:x", "words", "words:1", "words:abc", "cubes"])
def test_bad_builtin_names(spec):
    with pytest.raises(ParameterDomainError):
        make_builtin(spec)


def test_builtin_lookup():
    assert make_builtin("naturals", min_size=0).name == "naturals0"
    assert make_builtin("words", k=3).name == "words:3"
    assert make_builtin("pointed_naturals").name == "pointed"


@pytest.mark.parametrize("name", BUILTINS)
def test_unrank_injective_per_level(name):
    s = make_builtin(name)
    top = 200 if name.startswith("words") else 1000
    for n in range(0, top + 1):
        a = s.count(n)
        if a == 0:
            continue
        if a > 2000:
            # words: spot-check both ends and the middle of the level
            ranks = list(range(8)) + list(range(a // 2 - 4, a // 2 + 4)) + list(range(a - 8, a))
        else:
            ranks = range(a)
        labels = [s.unrank(n, i) for i in ranks]
        assert len(set(labels)) == len(labels)


def test_unrank_rejects_bad_rank():
    with pytest.raises(ParameterDomainError):
        naturals().unrank(3, 1)
    with pytest.raises(ParameterDomainError):
        naturals().unrank(0, 0)


def test_validate_bound_clean():
    assert validate_bound(naturals(), 1000) == []
    assert validate_bound(words(2), 64) == []
    assert validate_bound(pointed_naturals(), 500) == []


def test_validate_bound_reports_violations():
    s = make_structure("linear-in-constant", lambda n: n, lambda n, i: (n, i), ConstantBound(1), check=False)
    report = validate_bound(s, 10)
    assert [v.level for v in report] == list(range(2, 11))
    assert report[0].count == 2 and report[0].bound == 1


def test_validate_bound_horizon():
    with pytest.raises(ParameterDomainError):
        validate_bound(naturals(), 0)


def test_checked_construction_fails_loudly():
    with pytest.raises(BoundViolationError) as info:
        make_structure("bad", lambda n: n, lambda n, i: (n, i), ConstantBound(1))
    assert info.value.violations[0].level == 2


def test_linear_bound_forbids_size_zero():
    with pytest.raises(BoundViolationError):
        make_structure("bad", lambda n: 1, lambda n, i: n, LinearBound(1))


def test_bound_tightness():
    w = words(3)
    p = pointed_naturals()
    for n in range(1, 200):
        assert w.count(n) == w.bound.value(n)
        assert p.count(n) == p.bound.value(n)
        assert w.ratio(n) == 1.0 and p.ratio(n) == 1.0


def test_ratio_for_huge_counts():
    # 2**5000 overflows a double; the ratio must stay exact-ish
    w = words(2)
    assert w.ratio(5000) == pytest.approx(1.0, abs=1e-12)
    assert bound_ratio(ExponentialBound(1.0, 2.5), 2**5000, 4000) == pytest.approx(
        math.exp(5000 * math.log(2) - 4000 * math.log(2.5))
    )


@pytest.mark.parametrize("bound", [lambda: ConstantBound(0), lambda: ExponentialBound(1, 0),
                                   lambda: LinearBound(-1)])
def test_bound_domain(bound):
    with pytest.raises(ParameterDomainError):
        bound()


@given(st.integers(0, 10**15))
def test_vectorised_square_test_is_exact(n):
    s = squares()
    arr = np.array([n, n + 1, (math.isqrt(n) + 1) ** 2, math.isqrt(n) ** 2])
    expected = [s.count(int(v)) for v in arr]
    assert s.count_array(arr).tolist() == expected


@pytest.mark.parametrize("name", BUILTINS)
def test_vectorised_helpers_match_scalar(name):
    s = make_builtin(name)
    levels = np.arange(0, 300)
    assert np.allclose(s.ratio_array(levels), [s.ratio(int(n)) for n in levels])
    if s.count_array is not None:
        assert s.counts_for(levels).tolist() == [s.count(int(n)) for n in levels]


def test_counts_for_promotes_big_counts_to_objects():
    w = words(2)
    out = w.counts_for(np.array([3, 70]))
    assert out.dtype == object and out.tolist() == [8, 2**70]


def test_support_lists_every_nonzero_level():
    sq = squares()
    support = set(sq.support(0, 100).tolist())
    assert all(n in support for n in range(1, 10001) if sq.count(n))
    assert naturals().support(5, 3).tolist() == [5, 6, 7]
