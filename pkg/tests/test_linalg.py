import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian
from lindblad_lightcone.errors import NumericFailureError, RejectedInputError
from lindblad_lightcone.linalg import (
    as_matrix,
    commutator,
    hermitian_eigs,
    hermitian_eigvals,
    matrix_exp,
    operator_norm,
    trace_norm,
    unvec,
    vec,
    vectorize_superoperator,
)
from lindblad_lightcone.tolerances import TOL

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random(seed, n):
    r = np.random.default_rng(seed)
    return r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))


class TestValidation:
    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.zeros(4), [[np.nan, 0], [0, 1]]])
    def test_rejects_malformed(self, bad):
        with pytest.raises(RejectedInputError):
            as_matrix(bad)

    def test_rejects_infinite(self):
        with pytest.raises(RejectedInputError):
            as_matrix([[np.inf]])

    def test_dim_mismatch(self):
        with pytest.raises(RejectedInputError):
            commutator(np.eye(2), np.eye(3))

    def test_non_hermitian_eigensolve(self):
        with pytest.raises(RejectedInputError):
            hermitian_eigs([[0, 1], [0, 0]])


class TestCommutator:
    def test_identity_commutes(self, rng):
        b = _random(1, 4)
        assert np.all(commutator(np.eye(4), b) == 0)

    def test_self(self):
        a = _random(2, 5)
        assert np.allclose(commutator(a, a), 0, atol=1e-14)

    def test_hand_example(self):
        out = commutator(np.diag([1.0, 2.0]), [[0, 1], [0, 0]])
        assert np.array_equal(out, np.array([[0, -1], [0, 0]], dtype=complex))

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(1, 8))
    def test_leibniz(self, seed, n):
        a, b, c = _random(seed, n), _random(seed + 1, n), _random(seed + 2, n)
        lhs = commutator(a, b @ c)
        rhs = commutator(a, b) @ c + b @ commutator(a, c)
        scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
        assert np.linalg.norm(lhs - rhs) <= TOL.leibniz * scale


class TestEigensolver:
    def test_diagonal(self):
        assert np.allclose(hermitian_eigvals(np.diag([3.0, 1.0, 2.0])), [1, 2, 3], atol=1e-15)

    def test_pauli_x(self):
        assert np.allclose(hermitian_eigvals([[0, 1], [1, 0]]), [-1, 1], atol=1e-15)

    def test_zero(self):
        assert np.all(hermitian_eigvals(np.zeros((4, 4))) == 0)

    def test_one_by_one(self):
        dec = hermitian_eigs([[2.5]])
        assert dec.eigenvalues[0] == 2.5 and abs(dec.eigenvectors[0, 0]) == 1

    def test_random_reconstruction(self):
        # 100 random Hermitian matrices of dim <= 32; numpy's LAPACK eigvalsh is the oracle
        r = np.random.default_rng(7)
        for i in range(100):
            n = int(r.integers(1, 33))
            a = random_hermitian(r, n, scale=10.0 ** r.uniform(-3, 3))
            dec = hermitian_eigs(a)
            scale = max(1.0, np.linalg.norm(a, 2))
            assert np.linalg.norm(a - dec.reconstruct(), 2) <= TOL.eig_reconstruction * scale
            u = dec.eigenvectors
            assert np.linalg.norm(u.conj().T @ u - np.eye(n), 2) <= TOL.eig_orthonormality
            assert np.allclose(dec.eigenvalues, np.linalg.eigvalsh(a), atol=1e-12 * scale)

    def test_degenerate_spectrum(self):
        q, _ = np.linalg.qr(_random(3, 6))
        a = q @ np.diag([1, 1, 1, 2, 2, -3.0]) @ q.conj().T
        a = 0.5 * (a + a.conj().T)
        dec = hermitian_eigs(a)
        assert np.allclose(dec.eigenvalues, [-3, 1, 1, 1, 2, 2], atol=1e-13)
        assert np.linalg.norm(a - dec.reconstruct()) < 1e-12

    def test_tridiagonal_chain(self):
        # open chain: eigenvalues -2 cos(k pi / (n + 1))
        n = 21
        h = -(np.eye(n, k=1) + np.eye(n, k=-1))
        exact = np.sort(-2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
        assert np.allclose(hermitian_eigvals(h), exact, atol=1e-13)


class TestNorms:
    def test_identity(self):
        assert operator_norm(np.eye(5)) == pytest.approx(1.0, abs=1e-15)

    def test_diag(self):
        assert operator_norm(np.diag([-4.0, 2.0])) == pytest.approx(4.0, abs=1e-14)

    def test_nilpotent(self):
        assert operator_norm([[0, 2], [0, 0]]) == pytest.approx(2.0, abs=1e-14)

    def test_against_svd(self):
        r = np.random.default_rng(11)
        for n in (1, 3, 10, 30):
            a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
            assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-12)

    def test_trace_norm(self):
        assert trace_norm(np.diag([1.0, -2.0, 0.5])) == pytest.approx(3.5)

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.integers(1, 10))
    def test_submultiplicative(self, seed, n):
        a, b = _random(seed, n), _random(seed + 7, n)
        assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + TOL.submultiplicative


def _series_exp(a):
    # 60-digit Taylor series; the oracle for the Pade approximant
    with mpmath.workdps(60):
        m = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in a])
        out = mpmath.expm(m, method="taylor")
        return np.array([[complex(out[i, j]) for j in range(a.shape[1])] for i in range(a.shape[0])])


class TestMatrixExp:
    def test_zero(self):
        assert np.array_equal(matrix_exp(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        assert np.allclose(matrix_exp(np.diag([math.log(2), 0])), np.diag([2, 1]), atol=1e-15)

    def test_rotation(self):
        t = math.pi / 2
        out = matrix_exp([[0, t], [-t, 0]])
        assert np.max(np.abs(out - np.array([[0, 1], [-1, 0]]))) <= 1e-9

    @pytest.mark.parametrize("scale", [1e-3, 0.3, 1.0, 4.0, 20.0])
    def test_random_against_series(self, scale):
        r = np.random.default_rng(int(scale * 1000))
        for _ in range(5):
            a = scale * (r.standard_normal((4, 4)) + 1j * r.standard_normal((4, 4))) / 4
            ref = _series_exp(a)
            assert np.max(np.abs(matrix_exp(a) - ref)) <= TOL.expm_series * max(1.0, np.max(np.abs(ref)))

    def test_against_scipy_larger(self):
        a = _random(5, 40) * 0.5
        ref = scipy.linalg.expm(a)
        assert np.linalg.norm(matrix_exp(a) - ref) <= 1e-11 * np.linalg.norm(ref)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(1, 12))
    def test_commuting_product(self, seed, n):
        r = np.random.default_rng(seed)
        a = np.diag(r.uniform(-3, 3, n) + 1j * r.uniform(-3, 3, n))
        b = np.diag(r.uniform(-3, 3, n) + 1j * r.uniform(-3, 3, n))
        lhs = matrix_exp(a + b)
        rhs = matrix_exp(a) @ matrix_exp(b)
        assert np.max(np.abs(lhs - rhs)) <= TOL.expm_commuting * max(1.0, np.max(np.abs(lhs)))

    def test_overflow_reported(self):
        with pytest.raises(NumericFailureError, match="1-norm"):
            matrix_exp(np.eye(2) * 1e9)


class TestVectorization:
    def test_identity(self):
        assert np.array_equal(vectorize_superoperator(np.eye(2), np.eye(2)), np.eye(4))

    def test_left_diag(self):
        out = vectorize_superoperator(np.diag([2.0, 3.0]), np.eye(2))
        assert np.array_equal(out, np.diag([2, 2, 3, 3]).astype(complex))

    def test_right_diag(self):
        out = vectorize_superoperator(np.eye(2), np.diag([2.0, 3.0]))
        assert np.array_equal(out, np.diag([2, 3, 2, 3]).astype(complex))

    def test_row_stacking(self):
        rho = np.arange(9.0).reshape(3, 3)
        assert list(vec(rho)) == list(range(9))
        assert np.array_equal(unvec(vec(rho)), rho)

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.integers(1, 6))
    def test_sandwich(self, seed, n):
        left, right, rho = _random(seed, n), _random(seed + 1, n), _random(seed + 2, n)
        out = unvec(vectorize_superoperator(left, right) @ vec(rho))
        assert np.allclose(out, left @ rho @ right, atol=TOL.vec_convention * 10 * n**2)
