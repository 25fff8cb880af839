"""One step of the uncertainty-set recursion for a lag plant.

The step is split into the measurement update (:func:`slab_cut`) and the
dynamics propagation (:func:`lag_propagate`).  Propagation never touches a
linear program: the successor's incidence matrix is assembled from boolean
blocks built out of the current incidence matrix, facet classification and
the qualifying ridges, and the geometry follows from ``A``, ``B`` and ``A*``.

The alignment machinery (:func:`aligned`, :func:`compute_M`) is used by
:func:`verify_theorem1` to cross-check successive sets point by point.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .oracle import OracleInfeasible, PointSet, point_step, to_polytope_or_points
from .plant import PlantModel, dual_realization, primal_realization
from .polytope import (
    Polytope,
    canonicalize,
    popcount,
    qualifying_ridges,
    ridge_direction,
    support,
    bits,
)
from .scalar import EXACT, Backend, FloatBackend, _simplify, affine_rank, dot, mat_vec

__all__ = [
    "StepError",
    "InfeasibleMeasurement",
    "DegenerateCut",
    "NotFullDimensional",
    "MeasurementSlab",
    "FacetClassification",
    "DualLine",
    "AlignmentPair",
    "MSet",
    "PropagationTables",
    "StepReport",
    "VerificationReport",
    "slab",
    "classify_facets",
    "cut_halfspace",
    "slab_cut",
    "lag_propagate",
    "step",
    "advance",
    "dual_line",
    "aligned",
    "compute_M",
    "verify_theorem1",
    "interval_step",
]

MODES = ("utp", "ptu")
_MODE_ALIASES = {
    "update-then-propagate": "utp",
    "propagate-then-update": "ptu",
    "utp": "utp",
    "ptu": "ptu",
}


class StepError(Exception):
    pass


class InfeasibleMeasurement(StepError):
    pass


class DegenerateCut(StepError):
    """The slab meets the set in a lower-dimensional face only."""

    def __init__(self, msg, points=()):
        super().__init__(msg)
        self.points = tuple(points)


class NotFullDimensional(StepError):
    pass


def _mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown step mode {mode!r}") from None


@dataclass(frozen=True)
class MeasurementSlab:
    """``z - 1 <= <C, x> <= z + 1``."""

    C: tuple
    z: object

    def halfspaces(self) -> list[tuple[tuple, object]]:
        return [(tuple(self.C), self.z + 1), (tuple(-c for c in self.C), -(self.z - 1))]

    def contains(self, x, backend: Backend = EXACT) -> bool:
        y = dot(self.C, x)
        return backend.cmp(y, self.z + 1) <= 0 and backend.cmp(y, self.z - 1) >= 0


def slab(p: PlantModel, z, backend: Backend = EXACT) -> MeasurementSlab:
    real = primal_realization(p, backend)
    if all(backend.is_zero(c) for c in real.C):  # pragma: no cover - excluded by coprimality
        raise ValueError("output row is zero")
    return MeasurementSlab(real.C, backend.convert(z))


@dataclass(frozen=True)
class FacetClassification:
    up: tuple
    down: tuple
    zero: tuple

    def masks(self) -> tuple[int, int, int]:
        """The three classes as bit masks over facet indices."""
        return tuple(sum(1 << i for i, b in enumerate(cls) if b) for cls in (self.up, self.down, self.zero))


def classify_facets(S: Polytope, p: PlantModel) -> FacetClassification:
    """Split facets by the sign of ``d_m * (f)_1``: negative propagates up,
    positive propagates down, zero first component is extruded."""
    be = S.backend
    dm = be.convert(p.d_m)
    up, down, zero = [], [], []
    for f in S.normals:
        s = be.sign(dm * f[0])
        up.append(s < 0)
        down.append(s > 0)
        zero.append(s == 0)
    return FacetClassification(tuple(up), tuple(down), tuple(zero))


@dataclass
class PropagationTables:
    """Intermediate boolean blocks of the successor incidence matrix.

    Row masks are ints over vertex indices of the input polytope; the
    assembled matrix uses bits ``0..n_v-1`` for ``A v + B`` candidates and
    ``n_v..2 n_v-1`` for ``A v - B``.
    """

    n_v: int
    IF_T: int
    IF_B: int
    IF_O: int
    I_T: list
    I_B: list
    IV_PT: int
    IV_PB: int
    IO_T: list
    IO_B: list
    IRV: list
    IR_T: list
    IR_B: list
    assembled: list
    directions: list
    candidates: list
    ridges: list = field(default_factory=list)


@dataclass
class StepReport:
    n_f: int = 0
    n_v: int = 0
    n_R: int = 0
    n_f_out: int = 0
    n_v_out: int = 0
    pruned_rows: int = 0
    pruned_cols: int = 0
    merged_vertices: int = 0
    merged_facets: int = 0
    duration: float = 0.0
    mode: str = ""
    path: str = "fv"
    n_f_final: int = 0
    n_v_final: int = 0
    facet_count_pairs: list = field(default_factory=list)
    tables: PropagationTables | None = field(default=None, repr=False)
    # the set between the two sub-steps (after the cut or after propagation)
    intermediate: Polytope | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "n_f": self.n_f,
            "n_v": self.n_v,
            "n_R": self.n_R,
            "n_f_out": self.n_f_out,
            "n_v_out": self.n_v_out,
            "pruned_rows": self.pruned_rows,
            "pruned_cols": self.pruned_cols,
            "merged_vertices": self.merged_vertices,
            "merged_facets": self.merged_facets,
            "duration": self.duration,
            "mode": self.mode,
            "path": self.path,
            "n_f_final": self.n_f_final,
            "n_v_final": self.n_v_final,
        }


# --- measurement update ----------------------------------------------------

def cut_halfspace(S: Polytope, a: Sequence, b) -> Polytope:
    """``S & {<a, x> <= b}`` with vertices, facets and incidence updated.

    New vertices are the crossing points of edges joining a strictly
    feasible vertex to a strictly infeasible one; edges are read off the
    incidence matrix (the smallest face containing both endpoints has no
    other vertex).
    """
    be = S.backend
    m = S.dim
    vals = [dot(a, v) for v in S.vertices]
    sides = [be.cmp(v, b) for v in vals]
    if all(s <= 0 for s in sides):
        return S
    if all(s > 0 for s in sides):
        raise InfeasibleMeasurement("cut removes the whole set")
    if all(s >= 0 for s in sides):
        raise DegenerateCut("cut leaves a lower-dimensional face",
                            [v for v, s in zip(S.vertices, sides) if s == 0])
    cols = S.vertex_masks()
    rows = S.incidence
    nv = S.n_vertices
    all_facets = (1 << S.n_facets) - 1
    inside = [j for j in range(nv) if sides[j] < 0]
    outside = [j for j in range(nv) if sides[j] > 0]
    kept = [j for j in range(nv) if sides[j] <= 0]
    new_pts, new_facet_masks = [], []
    for p in inside:
        cp = cols[p]
        for q in outside:
            common = cp & cols[q]
            if popcount(common) < m - 1:
                continue
            face = (1 << nv) - 1
            for i in bits(common & all_facets):
                face &= rows[i]
                if face == (1 << p) | (1 << q):
                    break
            if face != (1 << p) | (1 << q):
                continue
            t = be.div(b - vals[p], vals[q] - vals[p])
            vp, vq = S.vertices[p], S.vertices[q]
            new_pts.append(tuple(_simplify(x + t * (y - x)) for x, y in zip(vp, vq)))
            new_facet_masks.append(common)
    index = {j: k for k, j in enumerate(kept)}
    n_kept = len(kept)
    vertices = [S.vertices[j] for j in kept] + new_pts
    normals, offsets, inc = [], [], []
    inside_mask = sum(1 << j for j in inside)
    for i, row in enumerate(rows):
        if not row & inside_mask:
            continue
        r = 0
        for j in bits(row):
            if j in index:
                r |= 1 << index[j]
        for k, fm in enumerate(new_facet_masks):
            if fm >> i & 1:
                r |= 1 << (n_kept + k)
        normals.append(S.normals[i])
        offsets.append(S.offsets[i])
        inc.append(r)
    r = sum(1 << index[j] for j in kept if sides[j] == 0)
    r |= sum(1 << (n_kept + k) for k in range(len(new_pts)))
    normals.append(tuple(a))
    offsets.append(b)
    inc.append(r)
    return canonicalize(Polytope(tuple(vertices), tuple(normals), tuple(offsets), tuple(inc), be))


def slab_cut(S: Polytope, sl: MeasurementSlab) -> Polytope:
    """Intersect ``S`` with the measurement slab (two halfspace cuts)."""
    out = S
    for a, b in sl.halfspaces():
        out = cut_halfspace(out, a, b)
    return out


# --- dynamics propagation --------------------------------------------------

def lag_propagate(S: Polytope, p: PlantModel, include_ridges: bool = True
                  ) -> tuple[Polytope, StepReport]:
    """Successor ``A S + [-B, B]`` assembled block by block.

    ``include_ridges=False`` drops the ridge block; it exists only so that
    verification runs can demonstrate that the oracle catches the fault.
    """
    be = S.backend
    m = S.dim
    if m < 2:
        raise NotFullDimensional("incidence propagation needs m >= 2")
    if affine_rank(list(S.vertices), be) != m:
        raise NotFullDimensional("polytope is not full-dimensional")
    t0 = time.perf_counter()
    real = primal_realization(p, be)
    dual = dual_realization(p, be)
    nv, nf = S.n_vertices, S.n_facets
    cls = classify_facets(S, p)
    IF_T, IF_B, IF_O = cls.masks()

    I_T = [row if cls.up[i] else 0 for i, row in enumerate(S.incidence)]
    I_B = [row if cls.down[i] else 0 for i, row in enumerate(S.incidence)]
    IV_PT = 0
    for row in I_T:
        IV_PT |= row
    IV_PB = 0
    for row in I_B:
        IV_PB |= row
    IO_T = [row & IV_PT if cls.zero[i] else 0 for i, row in enumerate(S.incidence)]
    IO_B = [row & IV_PB if cls.zero[i] else 0 for i, row in enumerate(S.incidence)]
    ridges = qualifying_ridges(S) if include_ridges else []
    IRV = [r.vertex_mask for r in ridges]
    IR_T = [mask & IV_PT for mask in IRV]
    IR_B = [mask & IV_PB for mask in IRV]

    propagated = [mat_vec(dual.A, f) for f in S.normals]
    ridge_dirs = [mat_vec(dual.A, ridge_direction(*r.direction_pair, backend=be)) for r in ridges]
    assembled = (
        [row for row in I_T]
        + [row << nv for row in I_B]
        + [t | (b << nv) for t, b in zip(IO_T, IO_B)]
        + [t | (b << nv) for t, b in zip(IR_T, IR_B)]
    )
    directions = propagated * 3 + ridge_dirs

    Av = [mat_vec(real.A, v) for v in S.vertices]
    candidates = ([tuple(x + y for x, y in zip(w, real.B)) for w in Av]
                  + [tuple(x - y for x, y in zip(w, real.B)) for w in Av])

    used_cols = 0
    for row in assembled:
        used_cols |= row
    col_ids = bits(used_cols)
    new_index = {j: k for k, j in enumerate(col_ids)}
    verts = [candidates[j] for j in col_ids]
    normals, offsets, inc, source = [], [], [], []
    for r, (row, f) in enumerate(zip(assembled, directions)):
        if not row:
            continue
        nr = 0
        for j in bits(row):
            nr |= 1 << new_index[j]
        # offsets from incident vertices, so no algebra on A* images is needed
        h = max((dot(f, verts[new_index[j]]) for j in bits(row)), key=_Key(be))
        normals.append(f)
        offsets.append(h)
        inc.append(nr)
        source.append(r)
    raw = Polytope(tuple(verts), tuple(normals), tuple(offsets), tuple(inc), be)
    out = canonicalize(raw)
    elapsed = time.perf_counter() - t0

    pairs = []
    out_keys = {f: i for i, f in enumerate(out.normals)}
    for r, f in zip(source, normals):
        if r < 2 * nf:
            i = r % nf
            cf = be.canonical(f)[0]
            k = out_keys.get(cf)
            pairs.append((popcount(S.incidence[i]),
                          popcount(out.incidence[k]) if k is not None else -1))
    tables = PropagationTables(nv, IF_T, IF_B, IF_O, I_T, I_B, IV_PT, IV_PB, IO_T, IO_B,
                               IRV, IR_T, IR_B, assembled, directions, candidates, ridges)
    report = StepReport(
        n_f=nf,
        n_v=nv,
        n_R=len(ridges),
        n_f_out=out.n_facets,
        n_v_out=out.n_vertices,
        pruned_rows=len(assembled) - len(normals),
        pruned_cols=2 * nv - len(col_ids),
        merged_vertices=len(col_ids) - out.n_vertices,
        merged_facets=len(normals) - out.n_facets,
        duration=elapsed,
        facet_count_pairs=pairs,
        tables=tables,
    )
    return out, report


class _Key:
    """Sort key routing comparisons through the backend."""

    def __init__(self, be):
        self.be = be

    def __call__(self, x):
        be = self.be
        if be.exact:
            return x

        class K:
            __slots__ = ("v",)

            def __init__(self, v):
                self.v = v

            def __lt__(self, other):
                return be.cmp(self.v, other.v) < 0

        return K(x)


def step(S: Polytope, z, p: PlantModel, mode: str = "ptu",
         include_ridges: bool = True) -> tuple[Polytope, StepReport]:
    """One full recursion step on a full-dimensional polytope.

    ``mode="utp"`` (update then propagate) cuts by the slab of ``z`` and then
    propagates; ``mode="ptu"`` (the default) propagates and then cuts.
    """
    mode = _mode(mode)
    sl = slab(p, z, S.backend)
    t0 = time.perf_counter()
    if mode == "utp":
        cut = slab_cut(S, sl)
        out, rep = lag_propagate(cut, p, include_ridges)
        rep.intermediate = cut
    else:
        prop, rep = lag_propagate(S, p, include_ridges)
        out = slab_cut(prop, sl)
        rep.intermediate = prop
    rep.duration = time.perf_counter() - t0
    rep.mode = mode
    rep.n_f_final = out.n_facets
    rep.n_v_final = out.n_vertices
    return out, rep


def advance(state, z, p: PlantModel, mode: str = "ptu", include_ridges: bool = True):
    """Step any representation of the uncertainty set.

    Full-dimensional sets go through :func:`step`; a degenerate cut or a
    lower-dimensional :class:`PointSet` is handled on extreme points and
    promoted back to a :class:`Polytope` once it spans the space.  Order-one
    plants use :func:`interval_step` on ``(lo, hi)`` tuples.
    """
    mode = _mode(mode)
    if p.m == 1:
        lo, hi = state
        t0 = time.perf_counter()
        out = interval_step(lo, hi, z, p, mode)
        return out, StepReport(mode=mode, path="interval", duration=time.perf_counter() - t0)
    if isinstance(state, Polytope):
        try:
            return step(state, z, p, mode, include_ridges)
        except DegenerateCut:
            points, be = state.vertices, state.backend
    else:
        points, be = state.points, state.backend
    t0 = time.perf_counter()
    try:
        pts = point_step(points, z, p, mode, be)
    except OracleInfeasible as exc:
        raise InfeasibleMeasurement(str(exc)) from None
    out = to_polytope_or_points(pts, be)
    rep = StepReport(mode=mode, path="points", duration=time.perf_counter() - t0)
    if isinstance(out, Polytope):
        rep.n_f_final, rep.n_v_final = out.n_facets, out.n_vertices
    else:
        rep.n_v_final = len(out.points)
    return out, rep


def initial_set(x0: Sequence, backend: Backend = EXACT):
    """The exactly known initial state as a one-point set."""
    x0 = tuple(backend.convert(c) for c in x0)
    if len(x0) == 1:
        return (x0[0], x0[0])
    return PointSet((x0,), backend)


def apply_measurement(state, z, p: PlantModel):
    """Cut any representation by the slab of ``z`` (no propagation)."""
    if p.m == 1:
        lo, hi = state
        return _interval_cut(lo, hi, z, p)
    be = state.backend
    sl = slab(p, z, be)
    if isinstance(state, Polytope):
        try:
            return slab_cut(state, sl)
        except DegenerateCut:
            points = state.vertices
    else:
        points = state.points
    pts = list(points)
    from .oracle import extreme_points, point_cut

    for a, b in sl.halfspaces():
        pts = point_cut(pts, a, b, be)
        if not pts:
            raise InfeasibleMeasurement("measurement inconsistent with the uncertainty set")
    return to_polytope_or_points(extreme_points(pts, be), be)


# --- alignment and the M set ------------------------------------------------

@dataclass(frozen=True)
class DualLine:
    """``n_m y* + d_m u* = rhs`` with ``rhs = -(f)_1``."""

    n_m: object
    d_m: object
    rhs: object

    def u_star(self, y_star):
        return Fraction(self.rhs - self.n_m * y_star) / self.d_m

    def contains(self, y_star, u_star) -> bool:
        return self.n_m * y_star + self.d_m * u_star == self.rhs


def dual_line(f: Sequence, p: PlantModel) -> DualLine:
    return DualLine(p.n_m, p.d_m, -f[0])


def aligned(primal: tuple, dual: tuple, z) -> bool:
    """Complementarity between ``(y, u)`` and ``(y*, u*)`` for measurement ``z``."""
    y, u = primal
    ys, us = dual
    checks = [
        not (us > 0) or u == 1,
        not (us < 0) or u == -1,
        not (abs(u) < 1) or us == 0,
        not (ys > 0) or y == 1 + z,
        not (ys < 0) or y == -1 + z,
        not (abs(y - z) < 1) or ys == 0,
    ]
    return all(checks)


@dataclass(frozen=True)
class AlignmentPair:
    u: object
    y_star: object


@dataclass(frozen=True)
class MSet:
    """Finite union of closed boxes ``[u_lo, u_hi] x [ys_lo, ys_hi]``.

    Each piece is degenerate in at least one coordinate except when the dual
    line lies on the ``y*`` axis.  ``None`` marks an unbounded end.
    """

    pieces: tuple = ()

    @property
    def empty(self) -> bool:
        return not self.pieces

    def contains(self, u, ys) -> bool:
        for ulo, uhi, lo, hi in self.pieces:
            if ulo <= u <= uhi and (lo is None or lo <= ys) and (hi is None or ys <= hi):
                return True
        return False

    def points(self) -> set:
        """The set as a set of pairs when it is finite."""
        out = set()
        for ulo, uhi, lo, hi in self.pieces:
            if ulo != uhi or lo is None or hi is None or lo != hi:
                raise ValueError("M set is not finite")
            out.add((ulo, lo))
        return out

    def sample_points(self) -> list[AlignmentPair]:
        """Corners of each piece, plus one point along each unbounded end."""
        out = []
        for ulo, uhi, lo, hi in self.pieces:
            ys_vals = []
            if lo is not None:
                ys_vals.append(lo)
            if hi is not None:
                ys_vals.append(hi)
            if lo is None:
                ys_vals.append((hi if hi is not None else 0) - 1)
            if hi is None:
                ys_vals.append((lo if lo is not None else 0) + 1)
            for u in {ulo, uhi}:
                for ys in ys_vals:
                    pair = AlignmentPair(u, ys)
                    if pair not in out:
                        out.append(pair)
        return out


def _interval_and(a, b):
    lo = a[0] if b[0] is None else b[0] if a[0] is None else max(a[0], b[0])
    hi = a[1] if b[1] is None else b[1] if a[1] is None else min(a[1], b[1])
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def compute_M(x: Sequence, f: Sequence, z, p: PlantModel) -> MSet:
    """Pairs ``(u, y*)`` aligned with a point of the dual line of ``f`` while
    ``(C x, u)`` stays in the measurement square.  Exact arithmetic only."""
    real = primal_realization(p)
    y = dot(real.C, x)
    z = Fraction(z)
    r = y - z
    if abs(r) > 1:
        return MSet()
    if abs(r) < 1:
        domain = (Fraction(0), Fraction(0))
    elif r == 1:
        domain = (Fraction(0), None)
    else:
        domain = (None, Fraction(0))
    f1 = Fraction(f[0]) if len(f) else Fraction(0)
    alpha = -f1 / p.d_m
    beta = Fraction(-p.n_m) / p.d_m
    pieces = []
    if beta == 0:
        if alpha > 0:
            pieces.append((1, 1) + domain)
        elif alpha < 0:
            pieces.append((-1, -1) + domain)
        else:
            pieces.append((-1, 1) + domain)
    else:
        root = -alpha / beta
        # u* > 0 on (root, inf) when beta > 0, on (-inf, root) otherwise
        pos = (root, None) if beta > 0 else (None, root)
        neg = (None, root) if beta > 0 else (root, None)
        for rng, u in ((pos, 1), (neg, -1)):
            inter = _interval_and(rng, domain)
            if inter is None:
                continue
            lo, hi = inter
            # the open end at root must leave something behind
            if lo is not None and hi is not None and lo == hi and lo == root:
                continue
            pieces.append((u, u, lo, hi))
        lo, hi = domain
        if (lo is None or lo <= root) and (hi is None or root <= hi):
            pieces.append((-1, 1, root, root))
    norm = []
    for ulo, uhi, lo, hi in pieces:
        norm.append((_n(ulo), _n(uhi), None if lo is None else _n(lo), None if hi is None else _n(hi)))
    return MSet(tuple(norm))


def _n(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


@dataclass
class VerificationReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_theorem1(S: Polytope, S_next: Polytope, z, p: PlantModel, samples: int | None = None,
                    seed: int = 0, include_zero: bool = True) -> VerificationReport:
    """Propagate (vertex, incident facet direction) pairs of ``S`` through
    every sampled element of their M set and check the images against
    ``S_next`` (obtained from ``S`` in update-then-propagate mode).

    Each image point must lie in ``S_next`` and the image direction must
    support ``S_next`` at that point.
    """
    real = primal_realization(p)
    dual = dual_realization(p)
    m = p.m
    pairs = []
    for j, col in enumerate(S.vertex_masks()):
        for i in bits(col):
            pairs.append((j, S.normals[i]))
        if include_zero:
            pairs.append((j, tuple([0] * m)))
    if samples is not None and samples < len(pairs):
        pairs = random.Random(seed).sample(pairs, samples)
    rep = VerificationReport()
    for j, f in pairs:
        v = S.vertices[j]
        M = compute_M(v, f, z, p)
        Av = mat_vec(real.A, v)
        Af = mat_vec(dual.A, f)
        for pair in M.sample_points():
            xp = tuple(a + b * pair.u for a, b in zip(Av, real.B))
            fp = tuple(a + b * pair.y_star for a, b in zip(Af, dual.B))
            rep.checked += 1
            if not S_next.contains(xp):
                rep.violations.append(f"vertex {j}, u={pair.u}: successor outside the next set")
                continue
            if any(c != 0 for c in fp):
                h, _ = support(S_next, fp)
                if dot(fp, xp) != h:
                    rep.violations.append(
                        f"vertex {j}, f={f}, y*={pair.y_star}: direction does not support the next set")
    return rep


# --- order-one plants --------------------------------------------------------

def _interval_cut(lo, hi, z, p: PlantModel):
    be = FloatBackend() if isinstance(lo, float) or isinstance(z, float) else EXACT
    c = be.convert(p.n[1])
    z = be.convert(z)
    a, b = be.div(z - 1, c), be.div(z + 1, c)
    if a > b:
        a, b = b, a
    lo2, hi2 = max(lo, a), min(hi, b)
    if be.cmp(lo2, hi2) > 0:
        raise InfeasibleMeasurement("measurement inconsistent with the interval")
    return lo2, hi2


def interval_step(lo, hi, z, p: PlantModel, mode: str = "utp"):
    """Exact recursion for order-one plants on the interval ``[lo, hi]``."""
    if p.m != 1:
        raise ValueError("interval_step needs an order-one plant")
    mode = _mode(mode)
    A = -p.d[1]

    def prop(lo, hi):
        a, b = A * lo, A * hi
        if a > b:
            a, b = b, a
        return a - 1, b + 1

    if mode == "utp":
        lo, hi = _interval_cut(lo, hi, z, p)
        return prop(lo, hi)
    lo, hi = prop(lo, hi)
    return _interval_cut(lo, hi, z, p)
