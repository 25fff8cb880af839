"""Lag plants ``P(lambda) = n(lambda) / d(lambda)`` and their realizations.

Coefficients are indexed by power of the delay operator, so ``n[0]`` is the
feedthrough term (must vanish) and ``d[0]`` is normalized to one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .scalar import EXACT, Backend, dot

__all__ = [
    "PlantError",
    "FeedthroughNotSupported",
    "SingularD",
    "NotCoprime",
    "PlantModel",
    "PrimalRealization",
    "DualRealization",
    "parse_plant",
    "primal_realization",
    "dual_realization",
    "poly_gcd",
]


class PlantError(ValueError):
    pass


class FeedthroughNotSupported(PlantError):
    pass


class SingularD(PlantError):
    pass


class NotCoprime(PlantError):
    pass


@dataclass(frozen=True)
class PlantModel:
    n: tuple
    d: tuple

    @property
    def m(self) -> int:
        return len(self.d) - 1

    @property
    def n_m(self):
        return self.n[-1]

    @property
    def d_m(self):
        return self.d[-1]


@dataclass(frozen=True)
class PrimalRealization:
    A: tuple
    B: tuple
    C: tuple


@dataclass(frozen=True)
class DualRealization:
    A: tuple
    B: tuple
    C: tuple
    D: object


def _strip(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list, b: list) -> list:
    a = [Fraction(c) for c in a]
    while len(a) >= len(b) and a:
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a = _strip(a)
    return a


def poly_gcd(a: Sequence, b: Sequence) -> list:
    """Monic gcd of two polynomials given low-degree-first."""
    a, b = _strip(a), _strip(b)
    while b:
        a, b = b, _poly_rem(a, b)
    if not a:
        return []
    lead = Fraction(a[-1])
    return [Fraction(c) / lead for c in a]


def parse_plant(n_coeffs: Sequence, d_coeffs: Sequence) -> PlantModel:
    """Validate a lag plant, normalizing the denominator so that ``d0 = 1``.

    Raises :class:`FeedthroughNotSupported` when ``n0 != 0``,
    :class:`SingularD` when ``d0`` or ``dm`` vanishes and :class:`NotCoprime`
    when numerator and denominator share a non-constant factor.
    """
    n = [EXACT.convert(c) for c in n_coeffs]
    d = [EXACT.convert(c) for c in d_coeffs]
    if len(n) != len(d):
        raise PlantError("numerator and denominator must have the same length")
    if len(d) < 2:
        raise PlantError("plant order must be at least 1")
    if n[0] != 0:
        raise FeedthroughNotSupported("n0 must be zero (plant with a lag)")
    if d[0] == 0 or d[-1] == 0:
        raise SingularD("d0 and dm must be non-zero")
    if d[0] != 1:
        d0 = d[0]
        n = [EXACT.div(c, d0) for c in n]
        d = [EXACT.div(c, d0) for c in d]
    if all(c == 0 for c in n):
        raise NotCoprime("numerator is identically zero")
    if len(poly_gcd(n, d)) > 1:
        raise NotCoprime("numerator and denominator share a common factor")
    return PlantModel(tuple(n), tuple(d))


def _convert_all(values, backend):
    return tuple(backend.convert(v) for v in values)


def primal_realization(p: PlantModel, backend: Backend = EXACT) -> PrimalRealization:
    """Companion-form realization ``x+ = A x + B u``, ``y = C x``."""
    m = p.m
    rows = []
    for i in range(m - 1):
        rows.append(tuple(1 if j == i + 1 else 0 for j in range(m)))
    rows.append(tuple(-p.d[m - j] for j in range(m)))
    A = tuple(_convert_all(r, backend) for r in rows)
    B = _convert_all([0] * (m - 1) + [1], backend)
    C = _convert_all([p.n[m - j] for j in range(m)], backend)
    return PrimalRealization(A, B, C)


def dual_realization(p: PlantModel, backend: Backend = EXACT) -> DualRealization:
    """Realization of the dual system; ``A*`` is the inverse transpose of ``A``.

    The last row satisfies ``(A* f)_m = -f_1 / d_m``; this is checked on the
    basis vectors before returning.
    """
    m = p.m
    dm = p.d_m
    first = [EXACT.div(-p.d[m - 1 - i], dm) for i in range(m)]
    rows = []
    for i in range(m):
        row = [first[i]] + [1 if (j == i + 1) else 0 for j in range(1, m)]
        rows.append(tuple(row))
    ratio = EXACT.div(p.n_m, dm)
    Bs = [p.n[m - 1 - i] - p.d[m - 1 - i] * ratio for i in range(m)]
    Cs = [EXACT.div(-1, dm)] + [0] * (m - 1)
    Ds = -ratio
    for k in range(m):
        e = [0] * m
        e[k] = 1
        lhs = dot(rows[m - 1], e)
        rhs = EXACT.div(-e[0], dm)
        if lhs != rhs:  # pragma: no cover - structural identity
            raise AssertionError("dual realization violates (A* f)_m = -f_1/d_m")
    return DualRealization(
        tuple(_convert_all(r, backend) for r in rows),
        _convert_all(Bs, backend),
        _convert_all(Cs, backend),
        backend.convert(Ds),
    )
