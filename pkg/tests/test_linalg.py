import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cmat, herm
from qcap.exceptions import DimensionMismatch, InvalidP, NonSquare, NotHermitian
from qcap.linalg import (clip_eigenvalues, direct_sum, hermitian_eig, hermitian_log, hermitian_power, inner,
                         partial_trace, psd_eigvalsh, random_density_matrix, random_unitary, schatten_norm,
                         tensor_product)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 7)


def test_eig_pauli_y():
    w, V = hermitian_eig(np.array([[0, -1j], [1j, 0]]))
    assert np.allclose(w, [1, -1], atol=1e-14)
    # first non-negligible component of each eigenvector is real positive
    for j in range(2):
        assert abs(V[0, j].imag) < 1e-14 and V[0, j].real > 0


def test_eig_diagonal_and_degenerate():
    w, V = hermitian_eig(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    w, V = hermitian_eig(np.eye(3))
    assert np.allclose(w, 1) and np.allclose(V.conj().T @ V, np.eye(3))


@given(seeds, dims)
def test_eig_jacobi_matches_lapack(seed, n):
    rng = np.random.default_rng(seed)
    A = herm(rng, n)
    w, V = hermitian_eig(A)
    w2, _ = hermitian_eig(A, method="lapack")
    scale = max(np.abs(w).max(), 1.0)
    assert np.allclose(w, w2, atol=1e-12 * scale)
    assert np.allclose(V @ np.diag(w) @ V.conj().T, A, atol=1e-11 * scale)
    assert np.allclose(V.conj().T @ V, np.eye(n), atol=1e-12)


def test_eig_rejects_bad_input():
    with pytest.raises(NonSquare):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_clip_eigenvalues():
    w = clip_eigenvalues([1.0, -1e-14, -0.5])
    assert w[1] == 0.0 and w[2] == -0.5
    assert np.all(psd_eigvalsh(np.diag([1.0, -1e-15])) >= 0)


def test_log_and_power():
    rng = np.random.default_rng(0)
    rho = random_density_matrix(4, rng)
    L = hermitian_log(rho)
    w, V = np.linalg.eigh(L)
    assert np.allclose((V * np.exp(w)) @ V.conj().T, rho, atol=1e-12)
    assert np.allclose(hermitian_power(rho, 0.5) @ hermitian_power(rho, 0.5), rho, atol=1e-12)
    # zero eigenvalues stay zero under powers and hit the floor under log
    P = np.diag([1.0, 0.0])
    assert np.allclose(hermitian_power(P, 0.3), P)
    assert np.isclose(hermitian_log(P)[1, 1], np.log(1e-12))


def test_schatten_closed_forms():
    A = np.diag([3.0, -4.0])
    assert np.isclose(schatten_norm(A, 1), 7)
    assert np.isclose(schatten_norm(A, 2), 5)
    assert np.isclose(schatten_norm(A, np.inf), 4)
    assert schatten_norm(np.zeros((2, 2)), 3) == 0.0
    N = np.array([[0, 2], [0, 0]])  # not Hermitian, singular values (2, 0)
    assert np.isclose(schatten_norm(N, 1.5), 2)
    with pytest.raises(InvalidP):
        schatten_norm(A, 0.5)


@given(seeds, dims)
def test_schatten_monotone_and_unitary_invariant(seed, n):
    rng = np.random.default_rng(seed)
    A = cmat(rng, n, n)
    ps = [1, 1.3, 2, 3.5, 8, np.inf]
    vals = [schatten_norm(A, p) for p in ps]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    U, W = random_unitary(n, rng), random_unitary(n, rng)
    for p, v in zip(ps, vals):
        assert np.isclose(schatten_norm(U @ A @ W, p), v, rtol=1e-10)


@given(seeds, dims)
def test_schatten_hoelder_duality(seed, n):
    rng = np.random.default_rng(seed)
    A, B = cmat(rng, n, n), cmat(rng, n, n)
    for p in (1.5, 2.0, 4.0):
        q = p / (p - 1)
        assert abs(inner(A, B)) <= schatten_norm(A, p) * schatten_norm(B, q) * (1 + 1e-12)


def test_partial_trace_product():
    rng = np.random.default_rng(3)
    A, B = random_density_matrix(2, rng), random_density_matrix(3, rng)
    X = tensor_product(A, B)
    assert np.allclose(partial_trace(X, 2, 3, keep="A"), A)
    assert np.allclose(partial_trace(X, 2, 3, keep="B"), B)
    with pytest.raises(DimensionMismatch):
        partial_trace(X, 2, 2)


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_partial_trace_is_adjoint_of_tensoring_identity(seed, a, b):
    rng = np.random.default_rng(seed)
    X, Y = cmat(rng, a * b, a * b), cmat(rng, a, a)
    lhs = inner(Y, partial_trace(X, a, b, keep="A"))
    rhs = inner(np.kron(Y, np.eye(b)), X)
    assert np.isclose(lhs, rhs)


def test_kron_row_major():
    A = np.array([[1, 2], [3, 4]])
    B = np.array([[0, 1], [1, 0]])
    X = tensor_product(A, B)
    # X[i*dB + k, j*dB + l] = A[i, j] B[k, l]
    assert X[1 * 2 + 0, 0 * 2 + 1] == A[1, 0] * B[0, 1]


def test_direct_sum_and_inner():
    D = direct_sum(np.eye(1), 2 * np.eye(2))
    assert np.allclose(np.diag(D), [1, 2, 2]) and np.count_nonzero(D) == 3
    A = np.array([[1j, 0], [0, 1]])
    assert np.isclose(inner(A, A), 2)


def test_random_generators():
    rng = np.random.default_rng(5)
    U = random_unitary(4, rng)
    assert np.allclose(U.conj().T @ U, np.eye(4))
    rho = random_density_matrix(3, rng, rank=1)
    assert np.isclose(np.trace(rho), 1) and np.linalg.matrix_rank(rho, tol=1e-10) == 1
