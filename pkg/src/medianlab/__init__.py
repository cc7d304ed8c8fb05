"""Executable median algebras, free median algebras and coarse median space measurements."""
from .ledger import ConstantLedger
from .limits import LimitExceeded
from .median import FiniteMedianAlgebra, median_cube, rank, verify_median_axioms
from .space import CoarseSpace, load_space
from .terms import free_median_algebra, parse_term, serialize

__version__ = "0.1.0"

__all__ = [
    "CoarseSpace",
    "ConstantLedger",
    "FiniteMedianAlgebra",
    "LimitExceeded",
    "free_median_algebra",
    "load_space",
    "median_cube",
    "parse_term",
    "rank",
    "serialize",
    "verify_median_axioms",
]
