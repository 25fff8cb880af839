from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from lagset import lp

SQUARE = [(1, 0), (-1, 0), (0, 1), (0, -1)]


def test_maximize_over_square():
    res = lp.maximize((1, 1), SQUARE, [1, 1, 1, 1])
    assert res.status == lp.OPTIMAL
    assert res.value == 2
    assert res.duals == (1, 1)


def test_maximize_unbounded_primal():
    # x <= 1 only: maximizing -x is unbounded, the dual has no solution
    res = lp.maximize((-1,), [(1,)], [1])
    assert res.status == lp.INFEASIBLE


def test_maximize_infeasible_primal():
    res = lp.maximize((1,), [(1,), (-1,)], [1, -2])
    assert res.status == lp.UNBOUNDED


def test_simplex_equality_form():
    # min y1 + 2 y2 with y1 + y2 = 3
    res = lp.simplex([1, 2], [(1,), (1,)], [3])
    assert res.value == 3
    assert res.y == (3, 0)
    assert lp.simplex([1], [(1,)], [-1]).status == lp.INFEASIBLE


def test_interior_point():
    depth, x = lp.interior_point(SQUARE, [1, 1, 1, 1])
    assert depth > 0
    assert all(abs(c) < 1 for c in x)
    # a segment has no interior
    depth, _ = lp.interior_point(SQUARE, [1, 1, 0, 0])
    assert depth == 0
    assert lp.interior_point(SQUARE, [1, -2, 1, 1]) is None


def test_cone_and_boundedness():
    assert lp.in_cone((1, 1), [(1, 0), (0, 1)])
    assert not lp.in_cone((-1, 0), [(1, 0), (0, 1)])
    assert lp.in_cone((0, 0), [])
    assert lp.is_bounded(SQUARE)
    assert not lp.is_bounded([(1, 0), (0, 1), (-1, -1)][:2])
    assert lp.is_bounded([(1, 0), (0, 1), (-1, -1)])
    assert not lp.is_bounded([])


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=6),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_box_lp_optimum_is_attained_at_a_corner(extra, c):
    # the box [-2, 2]^2 plus random cuts through points at distance >= 0 of the origin
    rows = [(1, 0), (-1, 0), (0, 1), (0, -1)] + [r for r in extra if r != (0, 0)]
    rhs = [2, 2, 2, 2] + [abs(a) + abs(b) for a, b in extra if (a, b) != (0, 0)]
    res = lp.maximize(c, rows, rhs)
    assert res.status == lp.OPTIMAL
    x = res.duals
    assert all(Fraction(a * x[0] + b * x[1]) <= r for (a, b), r in zip(rows, rhs))
    assert c[0] * x[0] + c[1] * x[1] == res.value
    # brute force over all pairwise intersections
    best = None
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            (a, b), (p, q) = rows[i], rows[j]
            det = a * q - b * p
            if det == 0:
                continue
            px = Fraction(rhs[i] * q - b * rhs[j], det)
            py = Fraction(a * rhs[j] - rhs[i] * p, det)
            if all(u * px + v * py <= r for (u, v), r in zip(rows, rhs)):
                val = c[0] * px + c[1] * py
                best = val if best is None else max(best, val)
    assert best == res.value
