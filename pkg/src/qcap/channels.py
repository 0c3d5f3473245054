"""Quantum (Kraus) and classical (stochastic matrix) channels.

A :class:`QuantumChannel` stores its Kraus operators as one array of shape
``(k, dim_out, dim_in)``. Channels are immutable: the arrays are flagged
read-only at construction.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .exceptions import DimensionMismatch, InvalidParameter
from .linalg import psd_eigvalsh
from .validation import check_square

TP_TOL = 1e-10
CP_TOL = 1e-10
STOCHASTIC_TOL = 1e-12


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map ρ ↦ Σ_k K_k ρ K_k^H.

    ``classical`` holds the stochastic matrix when the channel is a classical
    channel embedded on diagonal states. ``symmetry`` is an optional list of
    unitary pairs (π, σ) with N(π x π^H) = σ N(x) σ^H. ``input_blocks`` marks
    the block-diagonal structure of direct-sum channels as (start, stop)
    slices of the input space.
    """

    kraus: np.ndarray
    label: str = ""
    classical: Optional[np.ndarray] = None
    symmetry: Optional[Tuple] = field(default=None, repr=False)
    input_blocks: Optional[Tuple[Tuple[int, int], ...]] = None

    def __post_init__(self):
        K = np.asarray(self.kraus, dtype=complex)
        if K.ndim == 2:
            K = K[None]
        if K.ndim != 3 or K.shape[0] == 0:
            raise InvalidParameter("kraus must be a non-empty list of equally shaped matrices")
        object.__setattr__(self, "kraus", _frozen(K))
        if self.classical is not None:
            object.__setattr__(self, "classical", _frozen(np.asarray(self.classical, dtype=float)))
        if self.symmetry is not None:
            pairs = tuple((_frozen(np.asarray(a, dtype=complex)), _frozen(np.asarray(b, dtype=complex)))
                          for a, b in self.symmetry)
            object.__setattr__(self, "symmetry", pairs)

    @property
    def dim_in(self):
        return self.kraus.shape[2]

    @property
    def dim_out(self):
        return self.kraus.shape[1]

    @property
    def n_kraus(self):
        return self.kraus.shape[0]

    def __call__(self, rho):
        return apply(self, rho)


@dataclass(frozen=True, eq=False)
class ClassicalChannel:
    """Column-stochastic matrix with ``matrix[y, x] = p(y|x)``."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2 or M.size == 0:
            raise InvalidParameter("classical channel matrix must be a non-empty 2-d array")
        object.__setattr__(self, "matrix", _frozen(M))

    @property
    def dim_in(self):
        return self.matrix.shape[1]

    @property
    def dim_out(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ChannelReport:
    valid: bool
    tp_residual: float
    min_choi_eigenvalue: float

    def as_dict(self):
        return {"valid": self.valid, "tp_residual": self.tp_residual,
                "min_choi_eigenvalue": self.min_choi_eigenvalue}


@dataclass(frozen=True)
class ClassicalReport:
    valid: bool
    column_sum_residual: float
    min_entry: float

    def as_dict(self):
        return {"valid": self.valid, "column_sum_residual": self.column_sum_residual,
                "min_entry": self.min_entry}


def validate(ch):
    """Report the TP residual ||Σ K^H K - I||_inf and the smallest Choi eigenvalue."""
    if isinstance(ch, ClassicalChannel):
        M = ch.matrix
        resid = float(np.abs(M.sum(axis=0) - 1.0).max())
        mn = float(M.min())
        return ClassicalReport(resid <= STOCHASTIC_TOL and mn >= 0, resid, mn)
    K = ch.kraus
    S = np.einsum("kji,kjl->il", K.conj(), K)
    tp = float(np.linalg.norm(S - np.eye(ch.dim_in), ord=2))
    lam = float(psd_eigvalsh(choi(ch)).min())
    return ChannelReport(tp <= TP_TOL and lam >= -CP_TOL, tp, lam)


def apply(ch, rho):
    rho = check_square(rho, "input")
    if rho.shape[0] != ch.dim_in:
        raise DimensionMismatch(f"input has size {rho.shape[0]}, channel expects {ch.dim_in}")
    K = ch.kraus
    return np.einsum("kij,jl,kml->im", K, rho, K.conj())


def apply_adjoint(ch, A):
    A = check_square(A, "observable")
    if A.shape[0] != ch.dim_out:
        raise DimensionMismatch(f"observable has size {A.shape[0]}, channel output is {ch.dim_out}")
    K = ch.kraus
    return np.einsum("kji,jl,klm->im", K.conj(), A, K)


def apply_local(ch, X, d):
    """(id_d ⊗ N)(X) for X on C^d ⊗ C^dim_in."""
    X = check_square(X)
    n, m = ch.dim_in, ch.dim_out
    if X.shape[0] != d * n:
        raise DimensionMismatch(f"input of size {X.shape[0]} is not {d}x{n}")
    T = X.reshape(d, n, d, n)
    K = ch.kraus
    out = np.einsum("kyx,axbz,kwz->aybw", K, T, K.conj())
    return out.reshape(d * m, d * m)


def apply_local_adjoint(ch, A, d):
    """(id_d ⊗ N^*)(A) for A on C^d ⊗ C^dim_out."""
    n, m = ch.dim_in, ch.dim_out
    T = np.asarray(A, dtype=complex).reshape(d, m, d, m)
    K = ch.kraus
    out = np.einsum("kyx,aybw,kwz->axbz", K.conj(), T, K)
    return out.reshape(d * n, d * n)


def choi(ch):
    """Unnormalized Choi matrix Σ_ij e_ij ⊗ N(e_ij), input factor first."""
    n, m = ch.dim_in, ch.dim_out
    K = ch.kraus
    # block (i, j) equals Σ_k K[:, i] K[:, j]^H
    J = np.einsum("kai,kbj->iajb", K, K.conj())
    return J.reshape(n * m, n * m)


def complementary(ch, rho):
    """Environment output N^c(ρ)_{kl} = tr(K_k ρ K_l^H)."""
    K = ch.kraus
    return np.einsum("kij,jl,mil->km", K, rho, K.conj())


def heisenberg_weyl(n):
    """The n^2 unitaries X^a Z^b, ordered by (a, b)."""
    w = np.exp(2j * np.pi / n)
    X = np.roll(np.eye(n), 1, axis=0)
    Z = np.diag(w ** np.arange(n))
    out = []
    for a in range(n):
        Xa = np.linalg.matrix_power(X, a)
        for b in range(n):
            out.append(Xa @ np.linalg.matrix_power(Z, b))
    return np.array(out)


def _check_dim(n, name="n"):
    if int(n) != n or n < 1:
        raise InvalidParameter(f"{name} must be a positive integer, got {n}")
    return int(n)


def identity_channel(n, label=None):
    n = _check_dim(n)
    W = heisenberg_weyl(n)
    return QuantumChannel(np.eye(n)[None], label or f"identity({n})", symmetry=tuple((u, u) for u in W))


def depolarizing(n, lam, label=None):
    """λ ρ + (1 - λ) tr(ρ) I/n through the n^2 Heisenberg-Weyl Kraus operators."""
    n = _check_dim(n)
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameter(f"depolarizing parameter must lie in [0, 1], got {lam}")
    W = heisenberg_weyl(n)
    w = np.full(n * n, np.sqrt((1.0 - lam) / n**2))
    w[0] = np.sqrt(lam + (1.0 - lam) / n**2)
    return QuantumChannel(w[:, None, None] * W, label or f"depolarizing({n},{lam:g})",
                          symmetry=tuple((u, u) for u in W))


def classical_embed(M, label=None):
    """Quantum channel ρ ↦ Σ_{x,y} p(y|x) <x|ρ|x> |y><y| with Kraus √p(y|x) e_yx."""
    M = _check_stochastic(M)
    m, n = M.shape
    K = np.zeros((m * n, m, n))
    for x in range(n):
        for y in range(m):
            K[x * m + y, y, x] = np.sqrt(M[y, x])
    keep = np.abs(K).sum(axis=(1, 2)) > 0
    sym = None
    if m == n and np.allclose(M, np.eye(n)):
        sym = tuple((u, u) for u in heisenberg_weyl(n))
    return QuantumChannel(K[keep], label or f"classical_embed({m}x{n})", classical=M, symmetry=sym)


def classical_identity(n, label=None):
    """Complete dephasing in the computational basis."""
    n = _check_dim(n)
    return classical_embed(np.eye(n), label or f"classical_identity({n})")


def bsc(eps):
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameter(f"crossover probability must lie in [0, 1], got {eps}")
    return ClassicalChannel(np.array([[1 - eps, eps], [eps, 1 - eps]]), f"bsc({eps:g})")


def _check_stochastic(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise InvalidParameter("stochastic matrix must be a non-empty 2-d array")
    if M.min() < 0:
        raise InvalidParameter("stochastic matrix has negative entries")
    resid = np.abs(M.sum(axis=0) - 1.0).max()
    if resid > STOCHASTIC_TOL:
        raise InvalidParameter(f"columns must sum to 1 (residual {resid:.3e})")
    return M


def classical_channel(M, label=""):
    return ClassicalChannel(_check_stochastic(M), label)


def amplitude_damping(gamma):
    """Qubit amplitude damping; not covariant, handy as a generic test channel."""
    g = float(gamma)
    if not 0.0 <= g <= 1.0:
        raise InvalidParameter(f"damping must lie in [0, 1], got {g}")
    K0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    K1 = np.array([[0, np.sqrt(g)], [0, 0]])
    return QuantumChannel(np.array([K0, K1]), f"amplitude_damping({g:g})")


def random_channel(n, n_kraus, rng, m=None, label="random"):
    """Random CPTP map from a Haar-random isometry C^n -> C^m ⊗ C^k."""
    m = n if m is None else m
    if m * n_kraus < n:
        raise InvalidParameter(f"an isometry C^{n} -> C^{m} ⊗ C^{n_kraus} needs m * n_kraus >= n")
    G = rng.standard_normal((m * n_kraus, n)) + 1j * rng.standard_normal((m * n_kraus, n))
    Q, _ = np.linalg.qr(G)
    return QuantumChannel(Q.reshape(n_kraus, m, n), label)


def random_stochastic(m, n, rng):
    M = rng.random((m, n)) + 1e-3
    return M / M.sum(axis=0)


_KINDS = {
    "depolarizing": depolarizing,
    "classical_identity": classical_identity,
    "classical_embed": classical_embed,
    "bsc": bsc,
    "identity": identity_channel,
    "amplitude_damping": amplitude_damping,
    "classical": classical_channel,
}


def construct(kind, **params):
    """Build a named channel, e.g. ``construct("depolarizing", n=2, lam=0.5)``."""
    try:
        factory = _KINDS[kind]
    except KeyError:
        raise InvalidParameter(f"unknown channel kind {kind!r}; choose from {sorted(_KINDS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise InvalidParameter(f"bad parameters for {kind}: {exc}") from exc


def tensor_channel(a, b):
    K = np.einsum("iab,jcd->ijacbd", a.kraus, b.kraus)
    k = a.n_kraus * b.n_kraus
    K = K.reshape(k, a.dim_out * b.dim_out, a.dim_in * b.dim_in)
    sym = None
    if a.symmetry and b.symmetry:
        sym = tuple((np.kron(p1, p2), np.kron(s1, s2)) for p1, s1 in a.symmetry for p2, s2 in b.symmetry)
    return QuantumChannel(K, f"{a.label}⊗{b.label}", symmetry=sym)


def direct_sum_channel(a, b):
    """N(ρ1 ⊕ ρ2) = a(ρ1) + b(ρ2), carried on block inputs of size dim_in(a) + dim_in(b).

    Coherences between the two blocks are annihilated by the Kraus form, and
    the adjoint is A ↦ a*(A) ⊕ b*(A).
    """
    if a.dim_out != b.dim_out:
        raise DimensionMismatch(f"output dimensions differ: {a.dim_out} vs {b.dim_out}")
    na, nb, m = a.dim_in, b.dim_in, a.dim_out
    Ka = np.zeros((a.n_kraus, m, na + nb), dtype=complex)
    Ka[:, :, :na] = a.kraus
    Kb = np.zeros((b.n_kraus, m, na + nb), dtype=complex)
    Kb[:, :, na:] = b.kraus
    return QuantumChannel(np.concatenate([Ka, Kb]), f"{a.label}⊕{b.label}",
                          input_blocks=((0, na), (na, na + nb)))


def as_quantum(ch):
    """Embed a ClassicalChannel; pass quantum channels through."""
    if isinstance(ch, ClassicalChannel):
        return classical_embed(ch.matrix, ch.label or None)
    return ch


def support_projector(ch, tol=1e-12):
    """Isometry onto the support of N(I) (columns), or None when N(I) has full rank."""
    w, V = np.linalg.eigh(apply(ch, np.eye(ch.dim_in)))
    keep = w > tol * max(w.max(), 1.0)
    if keep.all():
        return None
    return V[:, keep]


def restrict_output(ch, P):
    """Compress the output of ch onto the range of the isometry P."""
    return QuantumChannel(np.einsum("ya,kyx->kax", P.conj(), ch.kraus), ch.label,
                          input_blocks=ch.input_blocks)
