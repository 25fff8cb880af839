"""Brute-force reference path: Fourier-Motzkin projection, exact redundancy
removal and point-set operations.

Nothing here looks at incidence matrices, ridges or the dual realization;
the one-step recursion is rebuilt directly from its definition by lifting
to ``(x+, u)``, eliminating ``u`` and pruning redundant rows.  This makes the
module usable as an independent check of the incidence-based update, and as
the fallback for sets that are not full-dimensional.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp
from .plant import PlantModel, primal_realization
from .polytope import LowerDimensional, Polytope, enumerate_vertices
from .scalar import EXACT, Backend, _simplify, affine_rank, dot, inverse, mat_vec

__all__ = [
    "HRep",
    "PointSet",
    "FMBlowup",
    "OracleInfeasible",
    "fm_eliminate",
    "remove_redundant",
    "oracle_step",
    "set_equal",
    "point_propagate",
    "point_cut",
    "extreme_points",
]

log = logging.getLogger(__name__)

FM_ROW_GUARD = 50_000


class FMBlowup(RuntimeError):
    """Fourier-Motzkin produced more rows than the configured guard."""


class OracleInfeasible(ValueError):
    """The measurement is inconsistent with the set (empty successor)."""


@dataclass(frozen=True)
class HRep:
    """``{x : <a, x> <= b for (a, b) in rows}`` in ``dim`` variables."""

    rows: tuple
    dim: int
    empty: bool = False
    full_dim: bool | None = None

    @classmethod
    def from_rows(cls, rows, dim=None):
        rows = tuple((tuple(a), b) for a, b in rows)
        if dim is None:
            dim = len(rows[0][0])
        return cls(rows, dim)

    @classmethod
    def from_polytope(cls, S: Polytope) -> "HRep":
        return cls(tuple(zip(S.normals, S.offsets)), S.dim, full_dim=True)

    @classmethod
    def point(cls, x: Sequence) -> "HRep":
        m = len(x)
        rows = []
        for k in range(m):
            e = [0] * m
            e[k] = 1
            rows.append((tuple(e), x[k]))
            rows.append((tuple(-c for c in e), -x[k]))
        return cls(tuple(rows), m)

    def contains(self, x) -> bool:
        return all(dot(a, x) <= b for a, b in self.rows)

    def vertices(self) -> list[tuple]:
        return enumerate_vertices(self.rows, EXACT, self.dim)


@dataclass(frozen=True)
class PointSet:
    """A polytope given only by its extreme points (may be lower-dimensional)."""

    points: tuple
    backend: Backend = EXACT

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def affine_dim(self) -> int:
        return affine_rank(list(self.points), self.backend)

    def contains(self, x) -> bool:
        cols = [tuple(p) + (1,) for p in self.points]
        return lp.in_cone(tuple(x) + (1,), cols)


def _canon_row(a, b):
    den = 1
    for c in a:
        den = den * Fraction(c).denominator // _gcd(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in a]
    g = 0
    for c in ints:
        g = _gcd(g, abs(c))
    if g == 0:
        return None, Fraction(b)
    return tuple(c // g for c in ints), Fraction(b) * den / g


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _normalize(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _dedupe(rows) -> tuple[list, bool]:
    """Canonical rows, tightest offset per direction; flags ``0 <= b < 0``."""
    best: dict = {}
    empty = False
    for a, b in rows:
        key, off = _canon_row(a, b)
        if key is None:
            if off < 0:
                empty = True
            continue
        if key not in best or off < best[key]:
            best[key] = off
    return [(k, _normalize(v)) for k, v in best.items()], empty


def fm_eliminate(H: HRep, var_index: int, guard: int = FM_ROW_GUARD) -> HRep:
    """Project out one variable by Fourier-Motzkin elimination."""
    k = var_index
    if not 0 <= k < H.dim:
        raise IndexError("variable index out of range")
    pos, neg, out = [], [], []
    for a, b in H.rows:
        c = a[k]
        if c > 0:
            pos.append((a, b))
        elif c < 0:
            neg.append((a, b))
        else:
            out.append((a[:k] + a[k + 1:], b))
    if len(out) + len(pos) * len(neg) > guard:
        raise FMBlowup(f"{len(out) + len(pos) * len(neg)} rows exceed guard {guard}")
    for ap, bp in pos:
        for an, bn in neg:
            sp, sn = -an[k], ap[k]
            a = tuple(sp * x + sn * y for x, y in zip(ap, an))
            out.append((a[:k] + a[k + 1:], sp * bp + sn * bn))
    rows, empty = _dedupe(out)
    return HRep(tuple(rows), H.dim - 1, empty=H.empty or empty)


def _lp_redundant(i, rows, alive) -> bool:
    a, b = rows[i]
    others = [rows[j][0] for j in alive if j != i]
    rhs = [rows[j][1] for j in alive if j != i]
    res = lp.maximize(a, others + [a], rhs + [b + 1])
    if res.status != lp.OPTIMAL:
        return False
    return res.value <= b


def _shoot(c, x, rows, cand):
    """Rows hit first by the ray from ``c`` towards ``x``."""
    d = [xi - ci for xi, ci in zip(x, c)]
    best, hits = None, []
    for j in cand:
        a, b = rows[j]
        slope = dot(a, d)
        if slope <= 0:
            continue
        t = (b - dot(a, c)) / Fraction(slope)
        if best is None or t < best:
            best, hits = t, [j]
        elif t == best:
            hits.append(j)
    return hits


def remove_redundant(H: HRep, seed: int = 0) -> HRep:
    """Minimal description of the same set, by exact LP redundancy tests.

    For full-dimensional sets the tests run against a growing set of rows
    already known to be facets (each new facet found by shooting a ray from
    an interior point), which keeps every LP small.  Lower-dimensional sets
    fall back to testing each row against all survivors.
    """
    rows, empty = _dedupe(H.rows)
    if H.empty or empty:
        return HRep(tuple(rows), H.dim, empty=True, full_dim=False)
    if not rows:
        return HRep((), H.dim, full_dim=True)
    ip = lp.interior_point([a for a, _ in rows], [b for _, b in rows])
    if ip is None:
        return HRep(tuple(rows), H.dim, empty=True, full_dim=False)
    depth, c = ip
    if depth == 0:
        alive = list(range(len(rows)))
        for i in list(alive):
            if _lp_redundant(i, rows, alive):
                alive.remove(i)
        return HRep(tuple(rows[i] for i in alive), H.dim, full_dim=False)

    rng = random.Random(seed)
    known: list[int] = []
    known_set: set[int] = set()
    everything = range(len(rows))
    for i in everything:
        while i not in known_set:
            a, b = rows[i]
            res = lp.maximize(a, [rows[j][0] for j in known] + [a],
                              [rows[j][1] for j in known] + [b + 1])
            if res.status != lp.OPTIMAL:  # pragma: no cover - cap row bounds the LP
                raise RuntimeError("redundancy LP failed")
            if res.value <= b:
                break
            x = res.duals
            hits = _shoot(c, x, rows, everything)
            tries = 0
            while len(hits) > 1 and tries < 8:
                tries += 1
                jitter = [Fraction(rng.randint(-1000, 1000), 10**6) for _ in x]
                hits = _shoot(c, [xi + e for xi, e in zip(x, jitter)], rows, everything)
                hits = [j for j in hits if j not in known_set] or hits
            new = [j for j in hits if j not in known_set]
            if len(new) > 1:
                alive = list(everything)
                new = [j for j in new if not _lp_redundant(j, rows, alive)]
            if not new:  # pragma: no cover - defensive
                new = [i] if not _lp_redundant(i, rows, list(everything)) else []
                if not new:
                    break
            for j in new:
                known.append(j)
                known_set.add(j)
    return HRep(tuple(rows[j] for j in sorted(known_set)), H.dim, full_dim=True)


def _slab_rows(C, z):
    return [(tuple(C), z + 1), (tuple(-c for c in C), -(z - 1))]


def oracle_step(H: HRep, z, p: PlantModel, mode: str = "ptu", guard: int = FM_ROW_GUARD) -> HRep:
    """One recursion step computed by lifting and projection.

    ``mode="utp"`` cuts ``H`` by the measurement slab and then propagates;
    ``mode="ptu"`` propagates first and cuts the result.  Raises
    :class:`OracleInfeasible` when the successor set is empty and
    :class:`FMBlowup` when elimination exceeds ``guard`` rows.
    """
    if mode not in ("utp", "ptu"):
        raise ValueError(f"unknown mode {mode!r}")
    real = primal_realization(p)
    m = p.m
    z = Fraction(z)
    Ainv = inverse(real.A)
    AinvB = mat_vec(Ainv, real.B)
    rows = list(H.rows)
    if mode == "utp":
        rows += _slab_rows(real.C, z)
    lifted = []
    # x = Ainv (x+ - B u)  =>  <a Ainv, x+> - <a, Ainv B> u <= b
    for a, b in rows:
        aA = tuple(sum(a[i] * Ainv[i][j] for i in range(m)) for j in range(m))
        lifted.append((aA + (-dot(a, AinvB),), b))
    lifted.append((tuple([0] * m) + (1,), 1))
    lifted.append((tuple([0] * m) + (-1,), 1))
    proj = fm_eliminate(HRep(tuple(lifted), m + 1, empty=H.empty), m, guard)
    if mode == "ptu":
        rows, empty = _dedupe(list(proj.rows) + _slab_rows(real.C, z))
        proj = HRep(tuple(rows), m, empty=proj.empty or empty)
    out = remove_redundant(proj)
    if out.empty:
        raise OracleInfeasible("measurement inconsistent with the uncertainty set")
    return out


def _vertex_key(v):
    return tuple(_normalize(c) for c in v)


def _canonical_facets(obj) -> set:
    if isinstance(obj, Polytope):
        rows = list(zip(obj.normals, obj.offsets))
    else:
        rows = list(remove_redundant(obj).rows)
    out = set()
    for a, b in rows:
        key, off = _canon_row(a, b)
        out.add((key, _normalize(off)))
    return out


def _vertex_set(obj) -> set:
    if isinstance(obj, Polytope):
        return {_vertex_key(v) for v in obj.vertices}
    if isinstance(obj, PointSet):
        return {_vertex_key(v) for v in obj.points}
    return {_vertex_key(v) for v in obj.vertices()}


def set_equal(a, b) -> bool:
    """Exact set equality of two polytopes in any mix of representations.

    Full-dimensional sets must have identical canonical facet sets and
    identical vertex sets, and every vertex of a :class:`Polytope` must be
    tight on exactly the facets its incidence column records.  Point sets
    (possibly lower-dimensional) are compared by their extreme points.
    """
    if isinstance(a, PointSet) or isinstance(b, PointSet):
        return _vertex_set(a) == _vertex_set(b)
    if isinstance(a, HRep) and a.full_dim is False or isinstance(b, HRep) and b.full_dim is False:
        return _vertex_set(a) == _vertex_set(b)
    fa, fb = _canonical_facets(a), _canonical_facets(b)
    if fa != fb:
        return False
    if _vertex_set(a) != _vertex_set(b):
        return False
    for P in (a, b):
        if not isinstance(P, Polytope):
            continue
        keys = [(_canon_row(f, h)[0], _normalize(_canon_row(f, h)[1])) for f, h in zip(P.normals, P.offsets)]
        cols = P.vertex_masks()
        for j, v in enumerate(P.vertices):
            tight = {k for k in fa if dot(k[0], v) == k[1]}
            recorded = {keys[i] for i in range(P.n_facets) if cols[j] >> i & 1}
            if tight != recorded:
                return False
    return True


# --- point-set operations for lower-dimensional sets ------------------------

def point_propagate(points, p: PlantModel, backend: Backend = EXACT) -> list[tuple]:
    """Images ``A v +- B`` of the given points."""
    real = primal_realization(p, backend)
    out = []
    for v in points:
        Av = mat_vec(real.A, v)
        out.append(tuple(x + y for x, y in zip(Av, real.B)))
        out.append(tuple(x - y for x, y in zip(Av, real.B)))
    return out


def point_cut(points, a, b, backend: Backend = EXACT) -> list[tuple]:
    """Generators of ``conv(points) & {<a, x> <= b}``.

    Keeps the points on the feasible side and adds the crossing point of
    every segment joining a feasible point to an infeasible one.
    """
    be = backend
    vals = [dot(a, v) for v in points]
    inside = [(v, s) for v, s in zip(points, vals) if be.cmp(s, b) <= 0]
    outside = [(v, s) for v, s in zip(points, vals) if be.cmp(s, b) > 0]
    out = [v for v, _ in inside]
    for v, sv in inside:
        if be.cmp(sv, b) == 0:
            continue
        for w, sw in outside:
            t = be.div(b - sv, sw - sv)
            out.append(tuple(_simplify(x + t * (y - x)) for x, y in zip(v, w)))
    return out


def extreme_points(points, backend: Backend = EXACT) -> list[tuple]:
    """Drop duplicates and every point lying in the hull of the others."""
    be = backend
    uniq: list[tuple] = []
    for p in points:
        p = tuple(p)
        if not any(all(be.eq(x, y) for x, y in zip(p, q)) for q in uniq):
            uniq.append(p)
    if len(uniq) <= 1:
        return uniq
    keep = list(uniq)
    for p in uniq:
        others = [q for q in keep if q is not p]
        if not others:
            break
        cols = [tuple(Fraction(c) for c in q) + (1,) for q in others]
        if lp.in_cone(tuple(Fraction(c) for c in p) + (1,), cols):
            keep = others
    return keep


def point_step(points, z, p: PlantModel, mode: str = "ptu", backend: Backend = EXACT) -> list[tuple]:
    """One recursion step on a point-set representation."""
    real = primal_realization(p, backend)
    z = backend.convert(z)

    def cut(pts):
        for a, b in _slab_rows(real.C, z):
            pts = point_cut(pts, a, b, backend)
            if not pts:
                raise OracleInfeasible("measurement inconsistent with the uncertainty set")
        return pts

    pts = list(points)
    if mode == "utp":
        pts = cut(pts)
        pts = point_propagate(pts, p, backend)
    else:
        pts = point_propagate(pts, p, backend)
        pts = cut(pts)
    return extreme_points(pts, backend)


def to_polytope_or_points(points, backend: Backend = EXACT):
    """:class:`Polytope` when the points span the space, else :class:`PointSet`."""
    from .polytope import from_vertices

    pts = list(points)
    if affine_rank(pts, backend) == len(pts[0]):
        try:
            return from_vertices(pts, backend)
        except LowerDimensional:  # pragma: no cover - rank checked above
            pass
    return PointSet(tuple(pts), backend)
