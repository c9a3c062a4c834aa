"""Dense complex matrices: validation, commutators, eigensolver, norms.

Operators are plain ``numpy.ndarray`` objects of dtype ``complex128`` and
shape ``(dim, dim)``.  :func:`as_matrix` is the single validating entry
point; everything else assumes its output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _jit
from ..errors import NumericFailureError, RejectedInputError
from ..tolerances import TOL
from ._eigh_kernels import tql_loops, tql_vec, tridiagonalize_loops, tridiagonalize_vec


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a square, finite ``complex128`` array (copied if needed)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise RejectedInputError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise RejectedInputError(f"{name} has non-finite entries")
    return m


def _same_dim(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise RejectedInputError(f"{what}: dimension mismatch {a.shape} vs {b.shape}")


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a, b) -> np.ndarray:
    """``[a, b] = ab - ba``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    _same_dim(a, b, "commutator")
    return a @ b - b @ a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """``A = U diag(eigenvalues) U^H`` with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


_tridiagonalize = _jit.select(tridiagonalize_loops, tridiagonalize_vec)
_tql = _jit.select(tql_loops, tql_vec)


def _check_hermitian(a: np.ndarray) -> None:
    # Frobenius norms bound the operator norm from above on both sides of the test
    skew = np.linalg.norm(a - a.conj().T)
    scale = max(1.0, float(np.linalg.norm(a)))
    if skew > TOL.hermitian_input * scale:
        raise RejectedInputError(
            f"matrix is not Hermitian: ||A - A^H|| = {skew:.3e} exceeds "
            f"{TOL.hermitian_input:g} * {scale:.3e}"
        )


def _eigh(a: np.ndarray, want_vectors: bool, kernels=None):
    a = as_matrix(a)
    _check_hermitian(a)
    n = a.shape[0]
    tridiagonalize, tql = kernels if kernels is not None else (_tridiagonalize, _tql)
    work = np.ascontiguousarray(hermitian_part(a))
    d, e, q = tridiagonalize(work, want_vectors)
    zt = np.eye(n) if want_vectors else np.zeros((1, 1))
    max_iter = TOL.eig_sweeps_per_dim * n
    status = tql(d, e, zt, want_vectors, max_iter)
    if status < 0:
        raise NumericFailureError(f"QL iteration did not converge within {max_iter} sweeps (dim {n})")
    order = np.argsort(d, kind="stable")
    values = d[order]
    if not want_vectors:
        return values, None
    vectors = q @ zt[order].T
    return values, np.ascontiguousarray(vectors)


def hermitian_eigs(a, *, kernels=None) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Householder reduction to real tridiagonal form followed by implicit-shift
    QL with eigenvector accumulation.  At most ``64 * dim`` QL sweeps are
    attempted before :class:`NumericFailureError` is raised.

    ``kernels`` overrides the ``(tridiagonalize, tql)`` pair; it exists for
    the benchmark and the backend cross-check tests.
    """
    values, vectors = _eigh(a, True, kernels)
    return HermitianEigenDecomposition(values, vectors)


def hermitian_eigvals(a, *, kernels=None) -> np.ndarray:
    """Ascending eigenvalues only (no eigenvector accumulation)."""
    return _eigh(a, False, kernels)[0]


def operator_norm(a) -> float:
    """Largest singular value, via the top eigenvalue of ``A^H A``."""
    a = as_matrix(a)
    gram = a.conj().T @ a
    top = hermitian_eigvals(hermitian_part(gram))[-1]
    return float(np.sqrt(max(top, 0.0)))


def hermitian_norm(a) -> float:
    """``max |eigenvalue|`` of a Hermitian matrix (equals its operator norm)."""
    ev = hermitian_eigvals(a)
    return float(max(abs(ev[0]), abs(ev[-1])))


def trace_norm(a) -> float:
    """Sum of singular values of a Hermitian matrix."""
    return float(np.sum(np.abs(hermitian_eigvals(a))))


def vectorize_superoperator(left, right) -> np.ndarray:
    """Matrix of ``rho -> left @ rho @ right`` acting on row-stacked ``vec(rho)``.

    ``vec(rho)[i * dim + j] = rho[i, j]``, so the matrix is ``left (x) right^T``.
    """
    left = as_matrix(left, "left")
    right = as_matrix(right, "right")
    _same_dim(left, right, "vectorize_superoperator")
    return np.kron(left, right.T)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.shape[0])))
    return v.reshape(n, n)
