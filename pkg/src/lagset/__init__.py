"""Exact uncertainty-set propagation for linear plants with a lag.

The uncertainty set of a bounded-noise SISO plant is kept as a polytope
given simultaneously by its vertices, facet directions and vertex-facet
incidence matrix.  Each measurement step updates all three together,
without linear programming; an independent Fourier-Motzkin oracle is
provided for verification and benchmarking.
"""
from .harness import Scenario, bench, example, random_stable_plant, simulate, verify
from .oracle import HRep, PointSet, fm_eliminate, oracle_step, remove_redundant, set_equal
from .plant import PlantModel, dual_realization, parse_plant, primal_realization
from .polytope import (
    Polytope,
    canonicalize,
    from_halfspaces,
    from_vertices,
    qualifying_ridges,
    ridge_direction,
    support,
    validate,
)
from .recursion import (
    advance,
    classify_facets,
    compute_M,
    interval_step,
    lag_propagate,
    slab,
    slab_cut,
    step,
    verify_theorem1,
)
from .scalar import EXACT, FloatBackend, canonicalize_direction, get_backend

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "FloatBackend",
    "HRep",
    "PlantModel",
    "PointSet",
    "Polytope",
    "Scenario",
    "advance",
    "bench",
    "canonicalize",
    "canonicalize_direction",
    "classify_facets",
    "compute_M",
    "dual_realization",
    "example",
    "fm_eliminate",
    "from_halfspaces",
    "from_vertices",
    "get_backend",
    "interval_step",
    "lag_propagate",
    "oracle_step",
    "parse_plant",
    "primal_realization",
    "qualifying_ridges",
    "random_stable_plant",
    "remove_redundant",
    "ridge_direction",
    "set_equal",
    "simulate",
    "slab",
    "slab_cut",
    "step",
    "support",
    "validate",
    "verify",
    "verify_theorem1",
]
