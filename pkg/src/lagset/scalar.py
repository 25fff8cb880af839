"""Arithmetic backends and small exact linear-algebra helpers.

Two backends are provided.  :data:`EXACT` works over :class:`fractions.Fraction`
(integers are accepted wherever a rational is expected) and makes every sign
test decisive.  :class:`FloatBackend` works over Python floats and routes all
sign and equality tests through a relative tolerance.

Vectors are plain tuples; matrices are tuples of row tuples.  The geometric
code never compares scalars directly, it always asks the backend.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

__all__ = [
    "ZeroDirection",
    "ExactBackend",
    "FloatBackend",
    "EXACT",
    "get_backend",
    "canonicalize_direction",
    "sign",
    "dot",
    "parse_scalar",
    "format_scalar",
]


class ZeroDirection(ValueError):
    """Raised when the zero vector is used where a direction is required."""


class ExactBackend:
    """Exact rational arithmetic."""

    name = "exact"
    exact = True

    def convert(self, x) -> Fraction | int:
        if isinstance(x, int):
            return x
        if isinstance(x, str):
            return _normalize(Fraction(x.strip()))
        if isinstance(x, float):
            # the binary value, not its decimal rendering
            return _normalize(Fraction(x))
        return _normalize(Fraction(x))

    def sign(self, x) -> int:
        return (x > 0) - (x < 0)

    def cmp(self, a, b) -> int:
        return self.sign(a - b)

    def eq(self, a, b) -> bool:
        return a == b

    def is_zero(self, x) -> bool:
        return x == 0

    def canonical(self, v: Sequence) -> tuple[tuple, Fraction | int]:
        """Return ``(w, s)`` with ``w = s * v`` integral, gcd 1, ``s > 0``."""
        if all(c == 0 for c in v):
            raise ZeroDirection("direction must be non-zero")
        den = 1
        for c in v:
            if not isinstance(c, int):
                den = math.lcm(den, Fraction(c).denominator)
        ints = [int(c * den) for c in v]
        g = reduce(math.gcd, (abs(c) for c in ints))
        scale = Fraction(den, g)
        return tuple(c // g for c in ints), _normalize(scale)

    def div(self, a, b):
        return _normalize(Fraction(a) / b)

    def key(self, x):
        return x

    def __repr__(self):
        return "ExactBackend()"


class FloatBackend:
    """Double precision arithmetic with a relative comparison tolerance.

    Two floats compare equal when ``|a - b| <= eps * max(1, |a|, |b|)``.
    """

    exact = False

    def __init__(self, eps: float = 1e-9):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.eps = float(eps)
        self.name = "float"

    def convert(self, x) -> float:
        if isinstance(x, str):
            return float(Fraction(x.strip()))
        return float(x)

    def sign(self, x) -> int:
        if abs(x) <= self.eps:
            return 0
        return 1 if x > 0 else -1

    def cmp(self, a, b) -> int:
        if abs(a - b) <= self.eps * max(1.0, abs(a), abs(b)):
            return 0
        return 1 if a > b else -1

    def eq(self, a, b) -> bool:
        return self.cmp(a, b) == 0

    def is_zero(self, x) -> bool:
        return self.sign(x) == 0

    def canonical(self, v: Sequence) -> tuple[tuple, float]:
        big = max(abs(c) for c in v)
        if big <= self.eps:
            raise ZeroDirection("direction must be non-zero")
        scale = 1.0 / big
        return tuple(0.0 if abs(c * scale) <= self.eps else c * scale for c in v), scale

    def div(self, a, b):
        return a / b

    def key(self, x):
        # coarse rounding for hashing; equality still goes through cmp
        digits = max(0, int(-math.log10(self.eps)) - 1)
        return round(x, digits) + 0.0

    def __eq__(self, other):
        return isinstance(other, FloatBackend) and other.eps == self.eps

    def __hash__(self):
        return hash(("float", self.eps))

    def __repr__(self):
        return f"FloatBackend(eps={self.eps!r})"


EXACT = ExactBackend()

Backend = ExactBackend | FloatBackend


def get_backend(name: str | Backend | None = None, eps: float = 1e-9) -> Backend:
    """Resolve a backend from a name (``"exact"`` or ``"float"``) or instance."""
    if name is None or name == "exact":
        return EXACT
    if name == "float":
        return FloatBackend(eps)
    if isinstance(name, (ExactBackend, FloatBackend)):
        return name
    raise ValueError(f"unknown backend {name!r}")


def _normalize(q: Fraction) -> Fraction | int:
    return q.numerator if q.denominator == 1 else q


def canonicalize_direction(v: Iterable, backend: Backend = EXACT) -> tuple:
    """Positive rescaling of ``v`` to canonical form.

    Exact backend: integer coordinates with gcd 1.  Float backend: unit
    max-norm.  Raises :class:`ZeroDirection` for the zero vector.

    >>> canonicalize_direction([Fraction(2, 3), Fraction(-4, 3)])
    (1, -2)
    """
    return backend.canonical([backend.convert(c) for c in v])[0]


def sign(s, backend: Backend = EXACT) -> int:
    return backend.sign(s)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def parse_scalar(text: str | int, backend: Backend = EXACT):
    """Parse ``"p/q"``, ``"p"`` or a decimal string."""
    return backend.convert(text)


def format_scalar(x) -> str:
    """Serialize a scalar: ``"p/q"`` or ``"p"`` for rationals, repr for floats."""
    if isinstance(x, float):
        return repr(x)
    q = Fraction(x)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# --- small dense linear algebra, generic over the backend -----------------

def rank(rows: Sequence[Sequence], backend: Backend = EXACT) -> int:
    """Row rank by Gaussian elimination."""
    mat = [_lift(r, backend) for r in rows]
    if not mat:
        return 0
    ncol = len(mat[0])
    r = 0
    for c in range(ncol):
        piv = None
        best = None
        for i in range(r, len(mat)):
            if not backend.is_zero(mat[i][c]):
                if backend.exact:
                    piv = i
                    break
                if best is None or abs(mat[i][c]) > best:
                    piv, best = i, abs(mat[i][c])
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][c]
        for i in range(r + 1, len(mat)):
            if not backend.is_zero(mat[i][c]):
                f = mat[i][c] / p
                row_i, row_r = mat[i], mat[r]
                for k in range(c, ncol):
                    row_i[k] -= f * row_r[k]
        r += 1
        if r == len(mat):
            break
    return r


def affine_rank(points: Sequence[Sequence], backend: Backend = EXACT) -> int:
    """Dimension of the affine hull; -1 for the empty set."""
    if not points:
        return -1
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]], backend)


def solve(mat: Sequence[Sequence], rhs: Sequence, backend: Backend = EXACT):
    """Solve a square system; returns ``None`` when singular."""
    n = len(mat)
    aug = [_lift(list(mat[i]) + [rhs[i]], backend) for i in range(n)]
    for c in range(n):
        piv = None
        if backend.exact:
            for i in range(c, n):
                if aug[i][c] != 0:
                    piv = i
                    break
        else:
            best = 0.0
            for i in range(c, n):
                if abs(aug[i][c]) > best:
                    piv, best = i, abs(aug[i][c])
            if piv is not None and backend.is_zero(best):
                piv = None
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        row_c = aug[c]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c] / p
                row_i = aug[i]
                for k in range(c, n + 1):
                    row_i[k] -= f * row_c[k]
    out = []
    for i in range(n):
        v = aug[i][n] / aug[i][i]
        out.append(_normalize(v) if isinstance(v, Fraction) else v)
    return tuple(out)


def mat_vec(mat: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(_simplify(dot(row, v)) for row in mat)


def transpose(mat: Sequence[Sequence]) -> tuple:
    return tuple(zip(*mat))


def inverse(mat: Sequence[Sequence], backend: Backend = EXACT):
    n = len(mat)
    cols = []
    for k in range(n):
        e = [0] * n
        e[k] = 1
        col = solve(mat, e, backend)
        if col is None:
            return None
        cols.append(col)
    return transpose(cols)


def _lift(row, backend):
    if backend.exact:
        return [Fraction(x) for x in row]
    return [float(x) for x in row]


def _simplify(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x
