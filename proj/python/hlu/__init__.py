"""Hierarchical LU factorization with extended sparsification."""

from ._core import (
    Error,
    Factorization,
    ParseError,
    ShapeError,
    SingularPivot,
    SparseMatrix,
    factorize,
    generate,
    gmres,
    load_matrix_market,
    manufactured_rhs,
    relative_residual,
)

__all__ = [
    "Error",
    "Factorization",
    "ParseError",
    "ShapeError",
    "SingularPivot",
    "SparseMatrix",
    "factorize",
    "generate",
    "gmres",
    "load_matrix_market",
    "manufactured_rhs",
    "relative_residual",
]
