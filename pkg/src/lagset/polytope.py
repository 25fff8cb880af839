"""Full-dimensional polytopes stored as vertices, facets and incidence.

A :class:`Polytope` keeps three synchronized pieces of data:

* ``vertices`` -- tuple of points (the columns of the vertex matrix),
* ``normals`` / ``offsets`` -- outward facet directions in canonical form and
  the support values ``h_i = max_x <f_i, x>``,
* ``incidence`` -- one int per facet used as a bit row; bit ``j`` of
  ``incidence[i]`` is set iff vertex ``j`` lies on facet ``i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import lp
from .scalar import EXACT, Backend, affine_rank, dot, rank

__all__ = [
    "PolytopeError",
    "EmptyPolytope",
    "EmptySet",
    "UnboundedSet",
    "LowerDimensional",
    "DegenerateRidge",
    "Polytope",
    "Ridge",
    "ValidationReport",
    "support",
    "validate",
    "canonicalize",
    "qualifying_ridges",
    "ridge_direction",
    "from_halfspaces",
    "from_vertices",
    "enumerate_vertices",
    "bits",
    "popcount",
]


class PolytopeError(ValueError):
    pass


class EmptyPolytope(PolytopeError):
    pass


class EmptySet(PolytopeError):
    pass


class UnboundedSet(PolytopeError):
    pass


class LowerDimensional(PolytopeError):
    def __init__(self, msg, points=()):
        super().__init__(msg)
        self.points = tuple(points)


class DegenerateRidge(PolytopeError):
    pass


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Polytope:
    vertices: tuple
    normals: tuple
    offsets: tuple
    incidence: tuple
    backend: Backend = field(default=EXACT, compare=False)

    @property
    def dim(self) -> int:
        if self.vertices:
            return len(self.vertices[0])
        return len(self.normals[0])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_facets(self) -> int:
        return len(self.normals)

    @property
    def V(self) -> np.ndarray:
        """Vertex matrix, one column per vertex (object dtype when exact)."""
        dtype = object if self.backend.exact else float
        return np.array(self.vertices, dtype=dtype).reshape(self.n_vertices, self.dim).T

    @property
    def F(self) -> np.ndarray:
        """Facet matrix, one column per facet direction."""
        dtype = object if self.backend.exact else float
        return np.array(self.normals, dtype=dtype).reshape(self.n_facets, self.dim).T

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        out = np.zeros((self.n_facets, self.n_vertices), dtype=bool)
        for i, row in enumerate(self.incidence):
            out[i, bits(row)] = True
        return out

    def vertex_masks(self) -> list[int]:
        """Column view of the incidence: facets through each vertex."""
        cols = [0] * self.n_vertices
        for i, row in enumerate(self.incidence):
            for j in bits(row):
                cols[j] |= 1 << i
        return cols

    def halfspaces(self) -> list[tuple[tuple, object]]:
        return list(zip(self.normals, self.offsets))

    def contains(self, x: Sequence) -> bool:
        be = self.backend
        return all(be.cmp(dot(f, x), h) <= 0 for f, h in zip(self.normals, self.offsets))

    def facet_vertices(self, i: int) -> list:
        return [self.vertices[j] for j in bits(self.incidence[i])]


@dataclass(frozen=True)
class Ridge:
    facet_pair: tuple[int, int]
    vertex_mask: int
    direction_pair: tuple[tuple, tuple]

    @property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(bits(self.vertex_mask))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(self.violations)


def support(S: Polytope, f: Sequence) -> tuple[object, frozenset]:
    """Support value ``max_j <f, v_j>`` and the indices attaining it."""
    if not S.vertices:
        raise EmptyPolytope("support of an empty polytope")
    be = S.backend
    values = [dot(f, v) for v in S.vertices]
    best = values[0]
    for v in values[1:]:
        if be.cmp(v, best) > 0:
            best = v
    arg = frozenset(j for j, v in enumerate(values) if be.eq(v, best))
    return best, arg


def validate(S: Polytope) -> ValidationReport:
    """Check every structural invariant; violations are listed, not raised."""
    rep = ValidationReport()
    be = S.backend
    m = S.dim
    nv, nf = S.n_vertices, S.n_facets
    if len(S.offsets) != nf or len(S.incidence) != nf:
        rep.violations.append("facet records have inconsistent lengths")
        return rep
    if nv == 0 or nf == 0:
        rep.violations.append("polytope has no vertices or no facets")
        return rep
    full = (1 << nv) - 1
    for i, (f, h, row) in enumerate(zip(S.normals, S.offsets, S.incidence)):
        if all(be.is_zero(c) for c in f):
            rep.violations.append(f"zero direction at facet {i}")
            continue
        if row & ~full:
            rep.violations.append(f"incidence row {i} refers to missing vertices")
        for j, v in enumerate(S.vertices):
            c = be.cmp(dot(f, v), h)
            on = bool(row >> j & 1)
            if c > 0:
                rep.violations.append(f"vertex {j} outside facet {i}")
            if on != (c == 0):
                rep.violations.append(f"incidence mismatch at ({i}, {j})")
        span = affine_rank(S.facet_vertices(i), be)
        if span != m - 1:
            rep.violations.append(f"facet {i} spans dimension {span}, expected {m - 1}")
    for j, col in enumerate(S.vertex_masks()):
        k = popcount(col)
        if k < m:
            rep.violations.append(f"vertex {j} lies on {k} facets, expected at least {m}")
    seen_v = {}
    for j, v in enumerate(S.vertices):
        key = tuple(be.key(c) for c in v)
        for k in seen_v.get(key, ()):
            if all(be.eq(a, b) for a, b in zip(v, S.vertices[k])):
                rep.violations.append(f"duplicate vertex {j} == {k}")
        seen_v.setdefault(key, []).append(j)
    seen_f = {}
    for i, (f, h) in enumerate(zip(S.normals, S.offsets)):
        try:
            cf, scale = be.canonical(f)
        except ValueError:
            continue
        key = tuple(be.key(c) for c in cf)
        for k, (g, hk) in seen_f.get(key, ()):
            if all(be.eq(a, b) for a, b in zip(cf, g)) and be.eq(h * scale, hk):
                rep.violations.append(f"duplicate facet {i} == {k}")
        seen_f.setdefault(key, []).append((i, (cf, h * scale)))
    return rep


def _remap(row: int, new_index: dict[int, int]) -> int:
    out = 0
    for j in bits(row):
        if j in new_index:
            out |= 1 << new_index[j]
    return out


def canonicalize(S: Polytope) -> Polytope:
    """Remove empty rows/columns, merge duplicates, canonicalize directions."""
    be = S.backend
    nf = S.n_facets
    # vertex columns: drop unused, merge equal points
    used = 0
    for row in S.incidence:
        used |= row
    new_index: dict[int, int] = {}
    verts: list = []
    lookup: dict = {}
    for j, v in enumerate(S.vertices):
        if not used >> j & 1:
            continue
        key = tuple(be.key(c) for c in v)
        hit = None
        for k in lookup.get(key, ()):
            if all(be.eq(a, b) for a, b in zip(v, verts[k])):
                hit = k
                break
        if hit is None:
            hit = len(verts)
            verts.append(v)
            lookup.setdefault(key, []).append(hit)
        new_index[j] = hit
    normals, offsets, rows = [], [], []
    flookup: dict = {}
    for i in range(nf):
        row = _remap(S.incidence[i], new_index)
        if not row:
            continue
        f, scale = be.canonical(S.normals[i])
        h = S.offsets[i] * scale
        if be.exact and isinstance(h, Fraction) and h.denominator == 1:
            h = h.numerator
        key = tuple(be.key(c) for c in f)
        hit = None
        for k in flookup.get(key, ()):
            if all(be.eq(a, b) for a, b in zip(f, normals[k])) and be.eq(h, offsets[k]):
                hit = k
                break
        if hit is None:
            flookup.setdefault(key, []).append(len(normals))
            normals.append(f)
            offsets.append(h)
            rows.append(row)
        else:
            rows[hit] |= row
    return Polytope(tuple(verts), tuple(normals), tuple(offsets), tuple(rows), be)


def ridge_direction(f1, f2: Sequence | None = None, backend: Backend = EXACT) -> tuple:
    """Direction in the cone of ``f1, f2`` with vanishing first component.

    ``f1`` may also be a :class:`Ridge`, whose direction pair is used.  Requires ``f1[0] < 0 < f2[0]``.  Uses ``f = t f1 + (1 - t) f2`` with
    ``t = f2[0] / (f2[0] - f1[0])``, which lies in ``(0, 1)``.
    """
    be = backend
    if isinstance(f1, Ridge):
        f1, f2 = f1.direction_pair
    if not (be.sign(f1[0]) < 0 < be.sign(f2[0])):
        raise ValueError("ridge directions need first components of opposite sign")
    if rank([f1, f2], be) < 2:
        raise DegenerateRidge("facet directions are parallel")
    t = be.div(f2[0], f2[0] - f1[0])
    fr = [t * a + (1 - t) * b for a, b in zip(f1, f2)]
    fr[0] = 0 if be.exact else 0.0
    return be.canonical(fr)[0]


def qualifying_ridges(S: Polytope) -> list[Ridge]:
    """Ridges shared by a facet with negative and one with positive first
    direction component.

    Each candidate pair is confirmed geometrically: the common vertices must
    span an affine set of dimension ``m - 2``.
    """
    be = S.backend
    m = S.dim
    neg = [i for i, f in enumerate(S.normals) if be.sign(f[0]) < 0]
    pos = [i for i, f in enumerate(S.normals) if be.sign(f[0]) > 0]
    out = []
    for i1 in neg:
        r1 = S.incidence[i1]
        for i2 in pos:
            common = r1 & S.incidence[i2]
            if popcount(common) < m - 1:
                continue
            pts = [S.vertices[j] for j in bits(common)]
            if affine_rank(pts, be) == m - 2:
                out.append(Ridge((i1, i2), common, (S.normals[i1], S.normals[i2])))
    return out


# --- construction from halfspaces or points --------------------------------

def _int_row(a: Sequence, b) -> tuple[tuple, int]:
    den = 1
    for c in list(a) + [b]:
        den = _lcm(den, Fraction(c).denominator)
    return tuple(int(Fraction(c) * den) for c in a), int(Fraction(b) * den)


def _lcm(a, b):
    import math
    return a * b // math.gcd(a, b)


def _det_int(mat: list[list[int]]) -> int:
    """Bareiss fraction-free determinant."""
    n = len(mat)
    M = [row[:] for row in mat]
    sgn = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sgn = -sgn
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sgn * M[n - 1][n - 1]


def enumerate_vertices(rows: Sequence[tuple[Sequence, object]], backend: Backend = EXACT,
                       dim: int | None = None) -> list[tuple]:
    """All vertices of ``{x : <a, x> <= b for (a, b) in rows}`` by exhaustive
    search over ``dim``-subsets of rows."""
    if not rows:
        return []
    m = dim if dim is not None else len(rows[0][0])
    if backend.exact:
        return _enumerate_exact(rows, m)
    return _enumerate_float(rows, m, backend)


def _enumerate_exact(rows, m):
    irows = [_int_row(a, b) for a, b in rows]
    found = {}
    for combo in itertools.combinations(range(len(irows)), m):
        M = [list(irows[i][0]) for i in combo]
        det = _det_int(M)
        if det == 0:
            continue
        nums = []
        for k in range(m):
            Mk = [r[:] for r in M]
            for t, i in enumerate(combo):
                Mk[t][k] = irows[i][1]
            nums.append(_det_int(Mk))
        if det < 0:
            det, nums = -det, [-x for x in nums]
        ok = True
        for a, b in irows:
            if sum(ai * xi for ai, xi in zip(a, nums)) > b * det:
                ok = False
                break
        if ok:
            pt = tuple(_norm(Fraction(x, det)) for x in nums)
            found.setdefault(pt, None)
    return list(found)


def _norm(q: Fraction):
    return q.numerator if q.denominator == 1 else q


def _enumerate_float(rows, m, be):
    A = np.array([[float(c) for c in a] for a, _ in rows])
    b = np.array([float(v) for _, v in rows])
    pts: list[tuple] = []
    for combo in itertools.combinations(range(len(rows)), m):
        sub = A[list(combo)]
        if abs(np.linalg.det(sub)) <= be.eps:
            continue
        x = np.linalg.solve(sub, b[list(combo)])
        if all(be.cmp(float(A[i] @ x), b[i]) <= 0 for i in range(len(rows))):
            p = tuple(float(c) for c in x)
            if not any(all(be.eq(u, w) for u, w in zip(p, q)) for q in pts):
                pts.append(p)
    return pts


def _build(points: list, planes: list[tuple[tuple, object]], be: Backend) -> Polytope:
    """Assemble a polytope from its vertex set and candidate halfspaces.

    Candidate rows that are not facets (tight set spans less than ``m - 1``)
    are dropped; duplicates are merged by :func:`canonicalize`.
    """
    m = len(points[0])
    normals, offsets, rows = [], [], []
    for a, b in planes:
        row = 0
        for j, v in enumerate(points):
            if be.cmp(dot(a, v), b) == 0:
                row |= 1 << j
        if popcount(row) < m:
            continue
        if affine_rank([points[j] for j in bits(row)], be) != m - 1:
            continue
        normals.append(tuple(a))
        offsets.append(b)
        rows.append(row)
    S = canonicalize(Polytope(tuple(points), tuple(normals), tuple(offsets), tuple(rows), be))
    # points that are not vertices lie on fewer than m independent facets
    masks = S.vertex_masks()
    keep = [j for j, col in enumerate(masks)
            if rank([S.normals[i] for i in bits(col)], be) == m]
    if len(keep) != S.n_vertices:
        new_index = {j: k for k, j in enumerate(keep)}
        S = Polytope(tuple(S.vertices[j] for j in keep), S.normals, S.offsets,
                     tuple(_remap(r, new_index) for r in S.incidence), be)
    return S


def from_halfspaces(H: Iterable[tuple[Sequence, object]], backend: Backend = EXACT) -> Polytope:
    """Polytope from a bounded, full-dimensional halfspace description.

    ``H`` holds pairs ``(a, b)`` meaning ``<a, x> <= b``.
    """
    be = backend
    H = [(tuple(be.convert(c) for c in a), be.convert(b)) for a, b in H]
    H = [(a, b) for a, b in H if not all(be.is_zero(c) for c in a) or be.sign(b) < 0]
    if not H:
        raise UnboundedSet("no constraints")
    m = len(H[0][0])
    for a, b in H:
        if all(be.is_zero(c) for c in a):
            raise EmptySet("constraint 0 <= negative")
    exact_rows = [tuple(Fraction(c) for c in a) for a, _ in H]
    exact_rhs = [Fraction(b) for _, b in H]
    ip = lp.interior_point(exact_rows, exact_rhs)
    if ip is None:
        raise EmptySet("halfspaces have empty intersection")
    if not lp.is_bounded(exact_rows):
        raise UnboundedSet("halfspace intersection is unbounded")
    pts = enumerate_vertices(H, be, m)
    if ip[0] == 0 or affine_rank(pts, be) < m:
        raise LowerDimensional("halfspace intersection is not full-dimensional", pts)
    return _build(pts, H, be)


def _hyperplane(points: Sequence[Sequence], be: Backend):
    """Normal of the hyperplane through ``m`` affinely independent points."""
    m = len(points[0])
    p0 = points[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    if rank(diffs, be) != m - 1:
        return None
    # generalized cross product via cofactors
    normal = []
    for k in range(m):
        minor = [[row[c] for c in range(m) if c != k] for row in diffs]
        normal.append((-1) ** k * _det_generic(minor, be))
    return tuple(normal)


def _det_generic(mat, be):
    n = len(mat)
    if n == 0:
        return 1
    if be.exact:
        M = [[Fraction(c) for c in row] for row in mat]
    else:
        M = [[float(c) for c in row] for row in mat]
    det = Fraction(1) if be.exact else 1.0
    for c in range(n):
        piv = next((i for i in range(c, n) if not be.is_zero(M[i][c])), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            for k in range(c, n):
                M[i][k] -= f * M[c][k]
    return _norm(det) if be.exact else det


def from_vertices(points: Iterable[Sequence], backend: Backend = EXACT) -> Polytope:
    """Convex hull of a finite point set by brute-force facet search.

    Intended for the handful of points met while a set is still lower
    dimensional; cost grows like ``C(n, m)``.
    """
    be = backend
    pts: list[tuple] = []
    for p in points:
        p = tuple(be.convert(c) for c in p)
        if not any(all(be.eq(a, b) for a, b in zip(p, q)) for q in pts):
            pts.append(p)
    if not pts:
        raise EmptySet("no points")
    m = len(pts[0])
    if affine_rank(pts, be) < m:
        raise LowerDimensional("points do not span the space", pts)
    planes = []
    seen = set()
    for combo in itertools.combinations(range(len(pts)), m):
        normal = _hyperplane([pts[i] for i in combo], be)
        if normal is None:
            continue
        h = dot(normal, pts[combo[0]])
        sides = {be.cmp(dot(normal, p), h) for p in pts}
        if 1 in sides and -1 in sides:
            continue
        if 1 in sides:
            normal = tuple(-c for c in normal)
            h = -h
        f, scale = be.canonical(normal)
        h = h * scale
        key = (tuple(be.key(c) for c in f), be.key(h))
        if key in seen:
            continue
        seen.add(key)
        planes.append((f, h))
    return _build(pts, planes, be)
