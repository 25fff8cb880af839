import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagset.harness import random_stable_plant
from lagset.plant import (
    FeedthroughNotSupported,
    NotCoprime,
    PlantError,
    SingularD,
    dual_realization,
    parse_plant,
    poly_gcd,
    primal_realization,
)
from lagset.scalar import inverse, mat_vec


def test_parse_examples():
    p = parse_plant((0, 1, 0), (1, 0, -1))
    assert p.m == 2
    with pytest.raises(FeedthroughNotSupported):
        parse_plant((1, 1), (1, 2))
    with pytest.raises(SingularD):
        parse_plant((0, 1, 1), (1, 1, 0))


def test_parse_normalizes_and_rejects():
    p = parse_plant((0, 2, 4), (2, 1, 1))
    assert p.d == (1, Fraction(1, 2), Fraction(1, 2))
    assert p.n == (0, 1, 2)
    with pytest.raises(NotCoprime):
        # both vanish at lambda = -1
        parse_plant((0, 1, 1), (1, 2, 1))
    with pytest.raises(NotCoprime):
        parse_plant((0, 0), (1, 2))
    with pytest.raises(PlantError):
        parse_plant((0, 1), (1, 2, 3))
    with pytest.raises(PlantError):
        parse_plant((0,), (1,))


def test_parse_is_idempotent():
    p = parse_plant((0, 3, -1), (2, 1, 5))
    assert parse_plant(p.n, p.d) == p


def test_poly_gcd():
    assert poly_gcd([-1, 0, 1], [1, 1]) == [1, 1]
    assert len(poly_gcd([1, 1], [1, 2])) == 1


def test_primal_examples():
    r = primal_realization(parse_plant((0, 1, 0), (1, 0, -1)))
    assert (r.A, r.B, r.C) == (((0, 1), (1, 0)), (0, 1), (0, 1))
    r = primal_realization(parse_plant((0, 1), (1, 2)))
    assert (r.A, r.B, r.C) == (((-2,),), (1,), (1,))
    r = primal_realization(parse_plant((0, 0, 1), (1, 3, 2)))
    assert (r.A, r.B, r.C) == (((0, 1), (-2, -3)), (0, 1), (1, 0))


def test_dual_examples():
    d = dual_realization(parse_plant((0, 1, 0), (1, 0, -1)))
    assert (d.A, d.B, d.C, d.D) == (((0, 1), (1, 0)), (1, 0), (1, 0), 0)
    d = dual_realization(parse_plant((0, 0, 1), (1, 3, 2)))
    h = Fraction(1, 2)
    assert d.A == ((-3 * h, 1), (-h, 0))
    assert d.B == (-3 * h, -h)
    assert d.C == (-h, 0)
    assert d.D == -h


def test_dual_is_inverse_transpose():
    p = parse_plant((0, 0, 1), (1, 3, 2))
    A = primal_realization(p).A
    As = dual_realization(p).A
    Ainv = inverse(A)
    assert As == tuple(zip(*Ainv))


@given(st.integers(2, 5), st.integers(0, 10_000))
def test_structural_identity(m, seed):
    p = random_stable_plant(m, seed)
    dual = dual_realization(p)
    rng = random.Random(seed)
    f = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(m)]
    if not any(f):
        f[0] = Fraction(1)
    assert mat_vec(dual.A, f)[-1] == -f[0] / p.d_m


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_companion_determinant(m, seed):
    p = random_stable_plant(m, seed)
    A = primal_realization(p).A
    Ainv = inverse(A)
    prod = [[sum(A[i][k] * Ainv[k][j] for k in range(m)) for j in range(m)] for i in range(m)]
    assert prod == [[int(i == j) for j in range(m)] for i in range(m)]
