"""JSON forms of plants, polytopes, halfspace systems and step traces.

Rationals are written as ``"p/q"`` strings (``"p"`` for integers) and floats
as their shortest round-trip decimal, so every file reloads to the exact
same values.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .oracle import HRep, PointSet
from .plant import PlantModel, parse_plant
from .polytope import Polytope, canonicalize
from .scalar import EXACT, Backend, format_scalar

__all__ = [
    "plant_to_dict",
    "plant_from_dict",
    "load_plant",
    "save_plant",
    "polytope_to_dict",
    "polytope_from_dict",
    "hrep_to_dict",
    "hrep_from_dict",
    "state_to_dict",
    "dumps",
]


def _vec(v) -> list[str]:
    return [format_scalar(c) for c in v]


def plant_to_dict(p: PlantModel) -> dict:
    return {"n": _vec(p.n), "d": _vec(p.d)}


def plant_from_dict(obj: dict) -> PlantModel:
    try:
        n, d = obj["n"], obj["d"]
    except (KeyError, TypeError):
        raise ValueError('plant JSON needs keys "n" and "d"') from None
    return parse_plant([EXACT.convert(str(c)) for c in n], [EXACT.convert(str(c)) for c in d])


def load_plant(path: str | Path) -> PlantModel:
    with open(path) as fh:
        return plant_from_dict(json.load(fh))


def save_plant(p: PlantModel, path: str | Path) -> None:
    Path(path).write_text(dumps(plant_to_dict(p)) + "\n")


def _bitstring(row: int, n: int) -> str:
    return "".join("1" if row >> j & 1 else "0" for j in range(n))


def polytope_to_dict(S: Polytope) -> dict:
    nv = S.n_vertices
    return {
        "vertices": [_vec(v) for v in S.vertices],
        "facets": [{"normal": _vec(f), "offset": format_scalar(h)}
                   for f, h in zip(S.normals, S.offsets)],
        "incidence": [_bitstring(r, nv) for r in S.incidence],
    }


def polytope_from_dict(obj: dict, backend: Backend = EXACT) -> Polytope:
    be = backend
    verts = tuple(tuple(be.convert(str(c)) for c in v) for v in obj["vertices"])
    normals = tuple(tuple(be.convert(str(c)) for c in f["normal"]) for f in obj["facets"])
    offsets = tuple(be.convert(str(f["offset"])) for f in obj["facets"])
    rows = tuple(sum(1 << j for j, ch in enumerate(s) if ch == "1") for s in obj["incidence"])
    return canonicalize(Polytope(verts, normals, offsets, rows, be))


def hrep_to_dict(H: HRep) -> dict:
    return {"rows": [{"a": _vec(a), "b": format_scalar(b)} for a, b in H.rows], "dim": H.dim}


def hrep_from_dict(obj: dict) -> HRep:
    rows = tuple((tuple(EXACT.convert(str(c)) for c in r["a"]), EXACT.convert(str(r["b"])))
                 for r in obj["rows"])
    return HRep(rows, int(obj["dim"]))


def state_to_dict(state) -> dict[str, Any]:
    """Dump any representation used during a run.

    Full-dimensional sets use the polytope format; lower-dimensional sets
    list their extreme points and intervals their end points.
    """
    if isinstance(state, Polytope):
        return polytope_to_dict(state)
    if isinstance(state, PointSet):
        return {"points": [_vec(v) for v in state.points]}
    lo, hi = state
    return {"interval": [format_scalar(lo), format_scalar(hi)]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)
