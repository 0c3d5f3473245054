"""Entropies in nats and the finite-p entropy surrogates used near p = 1."""
import numpy as np

from .channels import apply, apply_local
from .exceptions import DimensionMismatch, InvalidParameter, InvalidP
from .linalg import psd_eigvalsh, schatten_norm
from .validation import check_density_matrix, check_probability_vector

RANK_TOL = 1e-12


def _xlogx_sum(w):
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def entropy_of_spectrum(w):
    """-Σ w ln w for a clipped spectrum (0 ln 0 = 0)."""
    return _xlogx_sum(np.asarray(w, dtype=float))


def von_neumann_entropy(rho):
    """S(ρ) = -tr ρ ln ρ."""
    rho = check_density_matrix(rho)
    return _xlogx_sum(psd_eigvalsh(rho))


def batch_entropy(mats):
    """Von Neumann entropies of a stack of PSD matrices, no validation."""
    w = psd_eigvalsh(mats)
    return -np.sum(np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0), axis=-1)


def shannon_entropy(p):
    return _xlogx_sum(check_probability_vector(p))


def classical_mutual_information(p, ch):
    """H(X) + H(Y) - H(X,Y) for input distribution p through ch."""
    p = check_probability_vector(p)
    M = ch.matrix
    if M.shape[1] != p.size:
        raise DimensionMismatch(f"input distribution has {p.size} entries, channel has {M.shape[1]} inputs")
    joint = M * p[None, :]
    return _xlogx_sum(p) + _xlogx_sum(joint.sum(axis=1)) - _xlogx_sum(joint.ravel())


def minimal_purification(rho):
    """Vector Σ √λ_i |i> ⊗ |v_i> on C^rank ⊗ C^n, as a (rank, n) array.

    Row i holds √λ_i v_i, so the flattened array is the purification in
    row-major kron order with the ancilla first.
    """
    rho = check_density_matrix(rho)
    w, V = np.linalg.eigh(rho)
    keep = w > RANK_TOL
    return (np.sqrt(w[keep])[:, None] * V[:, keep].T)


def quantum_mutual_information(rho, ch, purification=None):
    """S(ρ) + S(N(ρ)) - S((id ⊗ N)(φφ^H)) with φ a purification of ρ.

    ``purification`` may be any (k, n) array Φ with Φ^T conj(Φ) = ρ; the
    minimal one is used by default.
    """
    rho = check_density_matrix(rho)
    if rho.shape[0] != ch.dim_in:
        raise DimensionMismatch(f"state has size {rho.shape[0]}, channel expects {ch.dim_in}")
    Phi = minimal_purification(rho) if purification is None else np.asarray(purification)
    k = Phi.shape[0]
    vec = Phi.reshape(-1)
    joint = apply_local(ch, np.outer(vec, vec.conj()), k)
    out = apply(ch, rho)
    return (_xlogx_sum(psd_eigvalsh(rho)) + _xlogx_sum(psd_eigvalsh(out))
            - _xlogx_sum(psd_eigvalsh(joint)))


def entropy_derivative_F(rho, p):
    """(1 - ||ρ||_p)/(p - 1), which tends to S(ρ) as p -> 1."""
    rho = check_density_matrix(rho)
    if not p > 0 or p == 1:
        raise InvalidP(f"p must be positive and different from 1, got {p}")
    w = psd_eigvalsh(rho)
    w = w[w > 0]
    # ||ρ||_p - 1 = expm1(ln Σ w^p / p), computed without cancellation
    log_norm = np.log(np.sum(np.exp(p * np.log(w)))) / p
    return float(-np.expm1(log_norm) / (p - 1))


def binary_entropy(t):
    return _xlogx_sum(np.array([t, 1.0 - t]))


def fannes_audenaert_bound(rho, sigma):
    """T ln(n - 1) + H(T, 1 - T) with T the trace distance of ρ and σ."""
    rho = check_density_matrix(rho)
    sigma = check_density_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch("states have different dimensions")
    n = rho.shape[0]
    if n < 2:
        raise DimensionMismatch("bound needs dimension at least 2")
    T = min(0.5 * schatten_norm(rho - sigma, 1), 1.0)
    return T * np.log(n - 1) + binary_entropy(T)


def power_gap_bounds(lam, p):
    """(λ^p (-ln λ)(p-1), λ - λ^p, λ (-ln λ)(p-1)) for λ ∈ (0, 1], p > 1.

    The middle entry lies between the outer two; it is evaluated as
    -λ expm1((p-1) ln λ) to avoid cancellation near p = 1.
    """
    lam = np.asarray(lam, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(lam <= 0) or np.any(lam > 1):
        raise InvalidParameter("lambda must lie in (0, 1]")
    if np.any(p <= 1):
        raise InvalidP("p must exceed 1")
    neg_log = -np.log(lam)
    mid = -lam * np.expm1((p - 1) * np.log(lam))
    return lam ** p * neg_log * (p - 1), mid, lam * neg_log * (p - 1)
