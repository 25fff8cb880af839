from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagset.scalar import (
    EXACT,
    FloatBackend,
    ZeroDirection,
    affine_rank,
    canonicalize_direction,
    format_scalar,
    get_backend,
    inverse,
    parse_scalar,
    rank,
    sign,
    solve,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)


def test_canonical_direction_examples():
    assert canonicalize_direction([Fraction(2, 3), Fraction(-4, 3)]) == (1, -2)
    assert canonicalize_direction([0, 5]) == (0, 1)
    with pytest.raises(ZeroDirection):
        canonicalize_direction([0, 0])


def test_sign_examples():
    assert sign(Fraction(-3, 7)) == -1
    assert sign(0) == 0
    assert sign(1e-15, FloatBackend(1e-9)) == 0
    assert sign(1e-3, FloatBackend(1e-9)) == 1


def test_float_canonical_is_unit_max_norm():
    v = FloatBackend().canonical([0.5, -2.0])[0]
    assert v == (0.25, -1.0)


def test_float_tolerance_is_relative():
    be = FloatBackend(1e-9)
    assert be.eq(1e12, 1e12 + 1)
    assert not be.eq(1.0, 1.0 + 1e-6)


def test_parse_and_format_round_trip():
    assert parse_scalar("3/6") == Fraction(1, 2)
    assert parse_scalar("4") == 4
    assert format_scalar(Fraction(-3, 4)) == "-3/4"
    assert format_scalar(Fraction(8, 4)) == "2"
    assert format_scalar(0.1) == "0.1"
    assert float(format_scalar(1 / 3)) == 1 / 3


def test_get_backend():
    assert get_backend("exact") is EXACT
    assert get_backend("float", 1e-6).eps == 1e-6
    with pytest.raises(ValueError):
        get_backend("decimal")


def test_small_linear_algebra():
    assert rank([[1, 2], [2, 4]]) == 1
    assert affine_rank([]) == -1
    assert affine_rank([(0, 0), (1, 1), (2, 2)]) == 1
    assert solve([[1, 1], [1, -1]], [3, 1]) == (2, 1)
    assert solve([[1, 1], [2, 2]], [1, 1]) is None
    assert inverse([[0, 1], [1, 0]]) == ((0, 1), (1, 0))


@given(rationals, rationals.filter(lambda b: b != 0))
def test_exact_round_trip(a, b):
    assert (a + b) - b == a
    assert EXACT.div(a * b, b) == a


@given(st.lists(rationals, min_size=1, max_size=5).filter(lambda v: any(v)),
       st.fractions(min_value=Fraction(1, 100), max_value=100))
def test_canonical_scale_invariant(v, alpha):
    c = canonicalize_direction(v)
    assert canonicalize_direction([alpha * x for x in v]) == c
    assert canonicalize_direction(c) == c
    # positive multiple of the input
    k = next(i for i, x in enumerate(v) if x != 0)
    ratio = Fraction(c[k]) / v[k]
    assert ratio > 0
    assert all(Fraction(ci) == ratio * vi for ci, vi in zip(c, v))


@given(rationals)
def test_sign_is_odd(s):
    assert sign(-s) == -sign(s)
