"""Certified computations for sums of two Fibonacci or Lucas cubes."""

__version__ = "0.1.0"

from .ballreal import BallReal, ConstantId, cmp_certified, constant, nearest_int_distance
from .collision_search import CollisionRecord, SearchConfig, classify_trivial, search, verify_record
from .contfrac import CFExpansion, convergent_quality, expand
from .recurrence_core import (
    QuadExact,
    SequenceKind,
    binet_check,
    fib_cube_via_identity,
    lucas_cube_via_identity,
    quad_power,
    seq_value,
)

__all__ = [
    "BallReal",
    "CFExpansion",
    "CollisionRecord",
    "ConstantId",
    "QuadExact",
    "SearchConfig",
    "SequenceKind",
    "binet_check",
    "classify_trivial",
    "cmp_certified",
    "constant",
    "convergent_quality",
    "expand",
    "fib_cube_via_identity",
    "lucas_cube_via_identity",
    "nearest_int_distance",
    "quad_power",
    "search",
    "seq_value",
    "verify_record",
]
