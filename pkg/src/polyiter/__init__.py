"""Triangular polynomial systems over prime fields: iteration, orbit statistics,
linear complexity and an input-driven hash."""

from .field import FieldElement, Prime, char_ep, is_prime, mult_order
from .lincomp import LinearComplexity, RelationWitness, linear_complexity
from .multipoly import MultiPoly
from .orbit import Orbit, OrbitState, build_orbit, find_period, generate, last_coordinate_closed_form, truncate
from .polyhash import Digest, HashParams, hash_bits
from .stats import BoxQuery, PointSet, discrepancy_exact, etk_bound, sum_S, sum_T, sum_U, sum_V
from .systems import (
    InvalidSystem,
    Schedule,
    ShapeMatrix,
    SizeGuardExceeded,
    SystemFamily,
    TriangularSystem,
    check_degree_law,
    is_permutation,
    iterate_symbolic,
    predicted_degrees,
    validate,
)

__all__ = [
    "BoxQuery", "Digest", "FieldElement", "HashParams", "InvalidSystem", "LinearComplexity",
    "MultiPoly", "Orbit", "OrbitState", "PointSet", "Prime", "RelationWitness", "Schedule",
    "ShapeMatrix", "SizeGuardExceeded", "SystemFamily", "TriangularSystem", "build_orbit",
    "char_ep", "check_degree_law", "discrepancy_exact", "etk_bound", "find_period", "generate",
    "hash_bits", "is_permutation", "is_prime", "iterate_symbolic", "last_coordinate_closed_form",
    "linear_complexity", "mult_order", "predicted_degrees", "sum_S", "sum_T", "sum_U", "sum_V",
    "truncate", "validate",
]
