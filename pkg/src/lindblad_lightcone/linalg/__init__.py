"""Dense complex linear algebra used throughout the package."""

from .core import (
    HermitianEigenDecomposition,
    as_matrix,
    commutator,
    dagger,
    hermitian_eigs,
    hermitian_eigvals,
    hermitian_norm,
    hermitian_part,
    operator_norm,
    trace_norm,
    unvec,
    vec,
    vectorize_superoperator,
)
from .expm import matrix_exp

__all__ = [
    "HermitianEigenDecomposition",
    "as_matrix",
    "commutator",
    "dagger",
    "hermitian_eigs",
    "hermitian_eigvals",
    "hermitian_norm",
    "hermitian_part",
    "matrix_exp",
    "operator_norm",
    "trace_norm",
    "unvec",
    "vec",
    "vectorize_superoperator",
]
