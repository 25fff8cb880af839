import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagset.harness import random_stable_plant
from lagset.oracle import (
    FMBlowup,
    HRep,
    OracleInfeasible,
    PointSet,
    extreme_points,
    fm_eliminate,
    oracle_step,
    point_cut,
    remove_redundant,
    set_equal,
)
from lagset.plant import primal_realization
from lagset.polytope import Polytope, from_vertices
from lagset.scalar import dot, inverse, mat_vec


def rows_of(H):
    return set(H.rows)


def test_fm_examples():
    H = HRep.from_rows([((0, 1), 1), ((0, -1), 1), ((1, -1), 0)])
    assert rows_of(fm_eliminate(H, 1)) == {((1,), 1)}
    H = HRep.from_rows([((1, 1), 1), ((1, -1), 1)])
    assert rows_of(fm_eliminate(H, 1)) == {((1,), 1)}
    H = HRep.from_rows([((1, 1), 1)])
    out = fm_eliminate(H, 1)
    assert out.rows == () and out.dim == 1


def test_fm_guard_and_index():
    H = HRep.from_rows([((1, k), k) for k in range(-5, 6) if k])
    with pytest.raises(FMBlowup):
        fm_eliminate(H, 1, guard=10)
    with pytest.raises(IndexError):
        fm_eliminate(H, 2)


def test_fm_detects_contradiction():
    H = HRep.from_rows([((0, 1), -1), ((0, -1), 0)])
    assert fm_eliminate(H, 1).empty


def test_remove_redundant_examples():
    H = HRep.from_rows([((1,), 1), ((1,), 2), ((-1,), 0)])
    assert rows_of(remove_redundant(H)) == {((1,), 1), ((-1,), 0)}
    sq = HRep.from_rows([((1, 0), 1), ((-1, 0), 1), ((0, 1), 1), ((0, -1), 1)])
    assert rows_of(remove_redundant(sq)) == rows_of(sq)
    H = HRep.from_rows([((1, 1), 2), ((1, 0), 1), ((0, 1), 1), ((-1, 0), 0), ((0, -1), 0)])
    assert rows_of(remove_redundant(H)) == {((1, 0), 1), ((0, 1), 1), ((-1, 0), 0), ((0, -1), 0)}


def test_remove_redundant_lower_dimensional_and_empty():
    seg = HRep.from_rows([((1, 0), 1), ((-1, 0), 1), ((0, 1), 0), ((0, -1), 0), ((1, 1), 3)])
    out = remove_redundant(seg)
    assert out.full_dim is False
    assert set(out.vertices()) == {(1, 0), (-1, 0)}
    assert ((1, 1), 3) not in out.rows
    empty = HRep.from_rows([((1, 0), 1), ((-1, 0), -2), ((0, 1), 1), ((0, -1), 1)])
    assert remove_redundant(empty).empty


def test_oracle_step_examples(swap_plant, square, diamond):
    out = oracle_step(HRep.from_polytope(square), 0, swap_plant, "utp")
    assert set(out.vertices()) == {(1, 2), (-1, 2), (1, -2), (-1, -2)}
    out = oracle_step(HRep.from_polytope(diamond), 0, swap_plant, "utp")
    assert len(out.rows) == 6
    assert set(out.vertices()) == {(1, 1), (-1, 1), (1, -1), (-1, -1), (0, 2), (0, -2)}
    with pytest.raises(OracleInfeasible):
        oracle_step(HRep.from_polytope(square), 10, swap_plant, "utp")
    with pytest.raises(ValueError):
        oracle_step(HRep.from_polytope(square), 0, swap_plant, "both")


def test_set_equal_examples(square):
    scaled = Polytope(square.vertices[::-1], tuple(tuple(3 * c for c in f) for f in square.normals[::-1]),
                      tuple(3 * h for h in square.offsets[::-1]),
                      tuple(_reverse_bits(r, 4) for r in square.incidence[::-1]))
    assert set_equal(square, scaled)
    big = from_vertices([(1, 2), (-1, 2), (1, -2), (-1, -2)])
    assert not set_equal(square, big)
    assert set_equal(square, HRep.from_polytope(square))
    assert set_equal(PointSet(((0, 0), (1, 1))), HRep.from_rows(
        [((1, -1), 0), ((-1, 1), 0), ((1, 0), 1), ((-1, 0), 0)]))


def test_set_equal_checks_incidence(square):
    rows = list(square.incidence)
    rows[0] = rows[0] & (rows[0] - 1)  # drop one vertex from facet 0
    broken = Polytope(square.vertices, square.normals, square.offsets, tuple(rows))
    assert not set_equal(broken, square)


def _reverse_bits(row, n):
    return sum(1 << (n - 1 - j) for j in range(n) if row >> j & 1)


def test_point_set_operations():
    pts = point_cut([(0, 0), (2, 0), (0, 2)], (1, 0), 1)
    assert set(extreme_points(pts)) == {(0, 0), (1, 0), (0, 2), (1, 1)}
    assert PointSet(((0, 0), (2, 2))).contains((1, 1))
    assert not PointSet(((0, 0), (2, 2))).contains((1, 0))
    assert PointSet(((0, 0), (2, 2))).affine_dim == 1


# --- properties -----------------------------------------------------------------

def _random_box_system(rng, dim, extra):
    rows = []
    for k in range(dim):
        e = [0] * dim
        e[k] = 1
        rows.append((tuple(e), rng.randint(1, 4)))
        rows.append((tuple(-c for c in e), rng.randint(1, 4)))
    for _ in range(extra):
        a = tuple(rng.randint(-3, 3) for _ in range(dim))
        if any(a):
            rows.append((a, rng.randint(1, 6)))
    return HRep.from_rows(rows)


@given(st.integers(0, 10_000))
def test_fm_projection_matches_membership(seed):
    rng = random.Random(seed)
    H = _random_box_system(rng, 3, 4)
    P = fm_eliminate(H, 2)
    for _ in range(10):
        x = (Fraction(rng.randint(-20, 20), 4), Fraction(rng.randint(-20, 20), 4))
        # x is in the projection iff some z satisfies every row
        lo, hi, ok = None, None, True
        for a, b in H.rows:
            r = b - a[0] * x[0] - a[1] * x[1]
            if a[2] > 0:
                hi = r / a[2] if hi is None else min(hi, r / a[2])
            elif a[2] < 0:
                lo = r / a[2] if lo is None else max(lo, r / a[2])
            elif r < 0:
                ok = False
        feasible = ok and (lo is None or hi is None or lo <= hi)
        assert P.contains(x) == feasible


@given(st.integers(0, 10_000))
def test_remove_redundant_idempotent_and_order_free(seed):
    rng = random.Random(seed)
    H = _random_box_system(rng, 2, 5)
    R = remove_redundant(H)
    assert rows_of(remove_redundant(R)) == rows_of(R)
    shuffled = list(H.rows)
    rng.shuffle(shuffled)
    assert rows_of(remove_redundant(HRep.from_rows(shuffled))) == rows_of(R)
    assert set_equal(R, HRep.from_rows(shuffled))


def _two_step_lifted(H, z0, z1, p):
    """Both measurement steps in one lifted system over (x2, u1, u0)."""
    real = primal_realization(p)
    Ainv = inverse(real.A)
    AinvB = mat_vec(Ainv, real.B)
    m = p.m

    # x1 = Ainv x2 - Ainv B u1 ; x0 = Ainv x1 - Ainv B u0, as affine maps of (x2, u1, u0)
    def compose(M, vec):
        return [tuple(sum(M[i][k] * vec[k][j] for k in range(m)) for j in range(m + 2)) for i in range(m)]

    x1 = [tuple(Ainv[i]) + (-AinvB[i], 0) for i in range(m)]
    x0 = compose(Ainv, x1)
    x0 = [tuple(r[:m]) + (r[m], -AinvB[i]) for i, r in enumerate(x0)]

    def on(coords, a):
        return tuple(sum(a[i] * coords[i][j] for i in range(m)) for j in range(m + 2))

    rows = [(on(x0, a), b) for a, b in H.rows]
    for x, z in ((x0, z0), (x1, z1)):
        rows.append((on(x, real.C), z + 1))
        rows.append((on(x, tuple(-c for c in real.C)), 1 - z))
    for k in (m, m + 1):
        e = [0] * (m + 2)
        e[k] = 1
        rows.append((tuple(e), 1))
        rows.append((tuple(-c for c in e), 1))
    L = HRep.from_rows(rows)
    L = fm_eliminate(L, m + 1)
    L = fm_eliminate(L, m)
    return remove_redundant(L)


@given(st.integers(0, 10_000))
def test_projection_is_associative(seed):
    rng = random.Random(seed)
    p = random_stable_plant(2, seed)
    H = HRep.from_rows([((1, 0), 1), ((-1, 0), 1), ((0, 1), 1), ((0, -1), 1)])
    C = primal_realization(p).C
    x = (Fraction(rng.randint(-4, 4), 4), Fraction(rng.randint(-4, 4), 4))
    z0 = dot(C, x) + Fraction(rng.randint(-4, 4), 4)
    x1 = mat_vec(primal_realization(p).A, x)
    z1 = dot(C, x1) + Fraction(rng.randint(-4, 4), 4)
    once = _two_step_lifted(H, z0, z1, p)
    twice = oracle_step(oracle_step(H, z0, p, "utp"), z1, p, "utp")
    assert set_equal(once, twice)
