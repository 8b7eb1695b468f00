"""MRRR eigensolver for symmetric tridiagonal matrices."""

from .driver import All, ByIndex, ByValue, EigenSystem, Selection, SelectionError, solve
from .profiles import SolverConfig, mixed32in64, standard64
from .tridiag import Tridiagonal, read_matrix, write_matrix

__all__ = [
    "All",
    "ByIndex",
    "ByValue",
    "EigenSystem",
    "Selection",
    "SelectionError",
    "SolverConfig",
    "Tridiagonal",
    "mixed32in64",
    "read_matrix",
    "solve",
    "standard64",
    "write_matrix",
]
