"""Input checks in the spirit of ``sklearn.utils.check_array``.

Each helper converts its argument to a numpy array, raises a typed error when
the input is unusable and returns the cleaned array.
"""
import numpy as np

from .exceptions import DimensionMismatch, InvalidState, NonSquare, NotHermitian

STATE_TOL = 1e-10
PROB_TOL = 1e-12


def check_matrix(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def check_square(A, name="matrix"):
    A = check_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {A.shape}")
    return A


def check_hermitian(A, tol=1e-10, name="matrix"):
    """Return the symmetrized matrix (A + A^H)/2 if A is Hermitian within tol*||A||_inf."""
    A = check_square(A, name)
    scale = max(np.abs(A).sum(axis=1).max(), 1.0)
    asym = np.abs(A - A.conj().T).max()
    if asym > tol * scale:
        raise NotHermitian(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    return (A + A.conj().T) / 2


def check_density_matrix(rho, tol=STATE_TOL, name="state"):
    """Validate a density matrix: Hermitian, PSD and unit trace, all within tol."""
    try:
        rho = check_hermitian(rho, tol=tol, name=name)
    except (NotHermitian, NonSquare, DimensionMismatch, ValueError) as exc:
        raise InvalidState(str(exc)) from exc
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"{name} has trace {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -tol:
        raise InvalidState(f"{name} is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return rho


def check_probability_vector(p, tol=PROB_TOL, name="probability vector"):
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise InvalidState(f"{name} must be a non-empty finite vector")
    if p.min() < -tol:
        raise InvalidState(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > max(tol, 1e-12 * p.size):
        raise InvalidState(f"{name} sums to {p.sum()!r}, expected 1")
    return np.clip(p, 0.0, None)


def check_random_state(seed):
    """Turn None, an int or a Generator into a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
