"""Dense complex linear algebra: eigendecomposition, Schatten norms, tensor
products, partial traces and direct sums.

Kronecker ordering is row-major throughout: in ``kron(A, B)`` the first factor
is the slow index, so ``X[i*dB + k, j*dB + l] = A[i, j] * B[k, l]``.
"""
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatch, InvalidP, NoConvergence, NonSquare
from .validation import check_hermitian, check_matrix, check_square

CLIP_TOL = 1e-12
LOG_FLOOR = 1e-12


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, columns


def _fix_phases(V, tol=1e-12):
    """Rotate every column so its first non-negligible entry is real positive."""
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > tol * max(np.abs(col).max(), 1.0))
        if idx.size:
            z = col[idx[0]]
            V[:, j] = col * (abs(z) / z)
    return V


def _jacobi_sweeps(A, max_sweeps, rel_tol):
    n = A.shape[0]
    A = A.copy()
    V = np.eye(n, dtype=complex)
    thresh = rel_tol * np.linalg.norm(A)
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= thresh:
            return np.diag(A).real.copy(), V, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # phase rotation that makes A[p, q] real, then a real Givens rotation
                J = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ J
    raise NoConvergence(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})")


def hermitian_eig(A, method="jacobi", max_sweeps=100, rel_tol=1e-13):
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back in descending order and every eigenvector has its
    first non-negligible component real and positive, so the output is
    deterministic. ``method="jacobi"`` runs cyclic complex Jacobi rotations;
    ``method="lapack"`` defers to ``numpy.linalg.eigh`` and applies the same
    ordering and phase convention.
    """
    A = check_hermitian(A)
    if method == "jacobi":
        w, V, _ = _jacobi_sweeps(A, max_sweeps, rel_tol)
    elif method == "lapack":
        w, V = np.linalg.eigh(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], _fix_phases(V[:, order]))


def clip_eigenvalues(w, scale=None, tol=CLIP_TOL):
    """Zero out eigenvalues in [-tol*scale, 0]; more negative values are kept."""
    w = np.array(w, dtype=float, copy=True)
    if scale is None:
        scale = np.abs(w).max(initial=0.0)
    w[(w < 0) & (w >= -tol * scale)] = 0.0
    return w


def psd_eigvalsh(A):
    """Clipped eigenvalues of a (stack of) PSD matrices, ascending."""
    w = np.linalg.eigvalsh(A)
    scale = np.abs(w).max(axis=-1, keepdims=True)
    return np.where((w < 0) & (w >= -CLIP_TOL * scale), 0.0, w)


def hermitian_log(A, floor=LOG_FLOOR):
    """Matrix logarithm of a (stack of) PSD matrices with eigenvalues floored at ``floor``."""
    w, V = np.linalg.eigh(A)
    lw = np.log(np.maximum(w, floor))
    return (V * lw[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def hermitian_power(A, s):
    """A**s for a (stack of) PSD matrices; zero eigenvalues map to zero."""
    w, V = np.linalg.eigh(A)
    w = np.maximum(w, 0.0)
    ws = np.where(w > 0, w, 1.0) ** s * (w > 0)
    return (V * ws[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def _is_hermitian(A):
    return np.allclose(A, A.conj().T, rtol=0.0, atol=1e-14 * max(np.abs(A).max(), 1.0))


def schatten_norm(A, p):
    """Schatten p-norm (Σ s_i^p)^(1/p) for p >= 1; ``p=np.inf`` gives the operator norm."""
    A = check_square(A)
    if not p >= 1:
        raise InvalidP(f"Schatten norm needs p >= 1, got {p}")
    if _is_hermitian(A):
        s = np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2))
    else:
        s = np.linalg.svd(A, compute_uv=False)
    return _lp(s, p)


def _lp(s, p):
    if np.isinf(p):
        return float(s.max())
    smax = s.max()
    if smax == 0:
        return 0.0
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))


def partial_trace(X, dim_a, dim_b, keep="A"):
    """Trace out one factor of X acting on C^dim_a ⊗ C^dim_b (row-major kron)."""
    X = check_square(X)
    if X.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(f"matrix of size {X.shape[0]} is not {dim_a}x{dim_b}")
    T = X.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep in ("A", "a", 0):
        return np.einsum("ikjk->ij", T)
    if keep in ("B", "b", 1):
        return np.einsum("kikj->ij", T)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def tensor_product(A, B):
    return np.kron(check_matrix(A), check_matrix(B))


def direct_sum(A, B):
    """Block-diagonal matrix A ⊕ B."""
    A, B = check_square(A), check_square(B)
    na, nb = A.shape[0], B.shape[0]
    out = np.zeros((na + nb, na + nb), dtype=np.result_type(A, B))
    out[:na, :na] = A
    out[na:, na:] = B
    return out


def inner(A, B):
    """Hilbert-Schmidt pairing trace(A^H B)."""
    return complex(np.vdot(A, B))


def random_unitary(n, rng):
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_pure_state(n, rng):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_density_matrix(n, rng, rank=None):
    """Random state from the induced (Ginibre) measure; full rank unless ``rank`` is given."""
    k = n if rank is None else rank
    G = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


__all__ = [
    "Spectrum",
    "NonSquare",
    "hermitian_eig",
    "clip_eigenvalues",
    "psd_eigvalsh",
    "hermitian_log",
    "hermitian_power",
    "schatten_norm",
    "partial_trace",
    "tensor_product",
    "direct_sum",
    "inner",
    "random_unitary",
    "random_pure_state",
    "random_density_matrix",
]
