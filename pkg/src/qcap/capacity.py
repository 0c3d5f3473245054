"""Entropy-side capacity optimizers.

Every optimizer returns a :class:`CapacityResult` whose ``value`` can be
recomputed from the witness ensemble with :func:`evaluate_objective`, so all
reported numbers are achievable rates (lower bounds).
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize

from .channels import (ClassicalChannel, QuantumChannel, apply, apply_adjoint, apply_local, choi,
                       complementary)
from .entropy import batch_entropy, classical_mutual_information
from .exceptions import DimensionMismatch, InvalidD, InvalidParameter, InvalidState
from .linalg import LOG_FLOOR, partial_trace, psd_eigvalsh
from .validation import check_density_matrix

WEIGHT_STEPS = 200
WEIGHT_TOL = 1e-10
STATE_STEPS = 30


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    max_iters: int = 1000
    rel_tol: float = 1e-10
    rng_seed: int = 0
    ensemble_cap: Optional[int] = None
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise InvalidParameter("restarts must be at least 1")
        if not self.rel_tol > 0:
            raise InvalidParameter("rel_tol must be positive")
        if int(self.max_iters) < 1:
            raise InvalidParameter("max_iters must be at least 1")
        if self.ensemble_cap is not None and int(self.ensemble_cap) < 1:
            raise InvalidParameter("ensemble_cap must be at least 1")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class Ensemble:
    """Weights λ_i and states ρ_i on C^d ⊗ C^n. ``vectors`` is set for pure ensembles."""

    weights: np.ndarray
    states: np.ndarray
    d: int
    n: int
    vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.ndim == 2:
            self.states = self.states[None]
        D = self.d * self.n
        if self.states.shape[1:] != (D, D):
            raise DimensionMismatch(f"states must be {D}x{D} for d={self.d}, n={self.n}")
        if self.weights.shape != (self.states.shape[0],):
            raise DimensionMismatch("one weight per state is required")

    @classmethod
    def from_vectors(cls, weights, vectors, d, n):
        V = np.asarray(vectors, dtype=complex).reshape(len(weights), d * n)
        V = V / np.linalg.norm(V, axis=1, keepdims=True)
        return cls(weights, np.einsum("Ni,Nj->Nij", V, V.conj()), d, n, vectors=V)

    def __len__(self):
        return len(self.weights)


@dataclass
class CapacityResult:
    value: float
    ensemble: Optional[Ensemble]
    iterations: int
    converged: bool
    restart_values: List[float] = field(default_factory=list)
    history: List[float] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def summary(self):
        out = {"value": self.value, "iterations": self.iterations, "converged": self.converged,
               "restart_values": list(self.restart_values)}
        if self.ensemble is not None:
            out["ensemble_size"] = int(np.count_nonzero(self.ensemble.weights > 0))
        out.update(self.diagnostics)
        return out


# ---------------------------------------------------------------------------
# classical channels

def blahut_arimoto(ch, cfg=OptimizerConfig()):
    """Capacity of a classical channel in nats.

    Stops once the Blahut-Arimoto upper bound max_x D(p(.|x) || q) and the
    current mutual information agree to rel_tol, or the mutual information
    stops moving.
    """
    if not isinstance(ch, ClassicalChannel):
        if isinstance(ch, QuantumChannel) and ch.classical is not None:
            ch = ClassicalChannel(ch.classical, ch.label)
        else:
            raise InvalidParameter("blahut_arimoto needs a classical channel")
    M = ch.matrix
    m, n = M.shape
    logM = np.log(np.where(M > 0, M, 1.0))
    p = np.full(n, 1.0 / n)
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        q = M @ p
        logq = np.log(np.where(q > 0, q, 1.0))
        D = np.sum(np.where(M > 0, M * (logM - logq[:, None]), 0.0), axis=0)
        lower = float(p @ D)
        upper = float(D.max())
        history.append(lower)
        if upper - lower <= cfg.rel_tol * max(1.0, abs(lower)):
            converged = True
            break
        if len(history) > 1 and abs(history[-1] - history[-2]) <= cfg.rel_tol * 1e-3 * max(1.0, abs(lower)):
            converged = True
            break
        p = p * np.exp(D - upper)
        p /= p.sum()
    value = classical_mutual_information(p, ch)
    states = np.zeros((n, n, n), dtype=complex)
    states[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    ens = Ensemble(p.copy(), states, 1, n)
    return CapacityResult(value, ens, it, converged, [value], history,
                          {"input_distribution": p.tolist(), "upper_bound": upper})


# ---------------------------------------------------------------------------
# the ensemble objective
#
# F(λ, ρ) = S(Σ λ_i N(tr_d ρ_i)) + Σ λ_i [S(tr_n ρ_i) - S((id_d ⊗ N)(ρ_i))]

def _check_d(ch, d):
    if int(d) != d or d < 1 or d > ch.dim_in:
        raise InvalidD(f"d must be an integer in [1, {ch.dim_in}], got {d}")
    return int(d)


def evaluate_objective(ch, d, ens):
    """Exact value of the ensemble objective for arbitrary (mixed) states."""
    n = ch.dim_in
    if ens.d != d or ens.n != n:
        raise DimensionMismatch(f"ensemble is {ens.d}x{ens.n}, expected {d}x{n}")
    w = ens.weights
    keep = w > 0
    w, rhos = w[keep], ens.states[keep]
    sig = np.array([partial_trace(r, d, n, keep="B") for r in rhos])
    tau = np.array([partial_trace(r, d, n, keep="A") for r in rhos])
    omega = np.array([apply_local(ch, r, d) for r in rhos])
    K = ch.kraus
    out = np.einsum("kyx,Nxz,kwz->Nyw", K, sig, K.conj())
    avg = np.tensordot(w, out, axes=1)
    return float(batch_entropy(avg) + w @ (batch_entropy(tau) - batch_entropy(omega)))


def _hlog(A):
    w, V = np.linalg.eigh(A)
    return (V * np.log(np.maximum(w, LOG_FLOOR))[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


class PureEnsembleObjective:
    """Ensemble objective for pure states ψ_i ∈ C^d ⊗ C^n, with analytic gradients.

    States are (N, d, n) arrays; row-major flattening gives the bipartite vector.
    ``mask`` (N, n) zeroes input coordinates, used to keep direct-sum inputs
    block diagonal.
    """

    def __init__(self, ch, d, mask=None):
        self.K = np.asarray(ch.kraus)
        self.Kc = self.K.conj()
        self.d = d
        self.n = ch.dim_in
        self.m = ch.dim_out
        self.mask = mask

    def _normalize(self, psi):
        if self.mask is not None:
            psi = psi * self.mask[:, None, :]
        nrm = np.sqrt(np.sum(np.abs(psi) ** 2, axis=(1, 2)))
        return psi / nrm[:, None, None], nrm

    def terms(self, psi):
        """Per-state pieces: normalized states, output states N(σ_i) and c_i = S(τ_i) - S(ω_i)."""
        u, nrm = self._normalize(psi)
        N = u.shape[0]
        tau = u @ np.swapaxes(u.conj(), 1, 2)
        # phi[N, k] = (I ⊗ K_k) ψ_N as a d x m matrix
        phi = np.tensordot(u, self.K, axes=([2], [2])).transpose(0, 2, 1, 3)
        flat = phi.reshape(N, -1, self.d * self.m)
        omega = np.swapaxes(flat, 1, 2) @ flat.conj()
        rows = phi.reshape(N, -1, self.m)
        out = np.swapaxes(rows, 1, 2) @ rows.conj()
        c = batch_entropy(tau) - batch_entropy(omega)
        return dict(u=u, nrm=nrm, tau=tau, phi=phi, omega=omega, out=out, c=c)

    @staticmethod
    def value_from_terms(w, t):
        avg = np.tensordot(w, t["out"], axes=1)
        return float(batch_entropy(avg[None])[0] + w @ t["c"])

    def value(self, w, psi):
        return self.value_from_terms(w, self.terms(psi))

    def gradient(self, w, psi, t=None):
        """Value and gradient with respect to the (unnormalized) complex states.

        The gradient g satisfies dF = Re Σ <g_i, dψ_i>.
        """
        t = self.terms(psi) if t is None else t
        u, N = t["u"], len(w)
        avg = np.tensordot(w, t["out"], axes=1)
        val = float(batch_entropy(avg[None])[0] + w @ t["c"])
        # -ln of the average output, pulled back through the adjoint channel
        L = _hlog(avg)
        B = -np.einsum("kyx,kyz->xz", self.Kc, np.matmul(L, self.K))
        g1 = u @ B.T
        g2 = -_hlog(t["tau"]) @ u
        Lw = _hlog(t["omega"])
        flat = t["phi"].reshape(N, -1, self.d * self.m)
        Y = (flat @ np.swapaxes(Lw, 1, 2)).reshape(N, -1, self.d, self.m)
        g3 = np.tensordot(Y, self.Kc, axes=([1, 3], [0, 1]))
        Gu = w[:, None, None] * (g1 + g2 + g3)
        proj = np.real(np.sum(u.conj() * Gu, axis=(1, 2)))
        g = 2.0 * (Gu - proj[:, None, None] * u) / t["nrm"][:, None, None]
        if self.mask is not None:
            g = g * self.mask[:, None, :]
        return val, g

    def weight_gradient(self, w, t):
        """dF/dλ_i up to an additive constant: -tr(N(σ_i) ln avg) + c_i."""
        avg = np.tensordot(w, t["out"], axes=1)
        L = _hlog(avg)
        return -np.real(np.einsum("Nyw,wy->N", t["out"], L)) + t["c"]


def _weight_step(obj, w, t, steps=WEIGHT_STEPS, tol=WEIGHT_TOL):
    """Exponentiated-gradient ascent on the weights with step 1, halved until the objective increases."""
    f = obj.value_from_terms(w, t)
    for _ in range(steps):
        g = obj.weight_gradient(w, t)
        eta = 1.0
        improved = False
        while eta > 1e-8:
            z = np.log(np.maximum(w, 1e-300)) + eta * (g - g.max())
            wn = np.exp(z - z.max())
            wn /= wn.sum()
            fn = obj.value_from_terms(wn, t)
            if fn >= f:
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
        gain = fn - f
        w, f = wn, fn
        if gain <= tol * max(1.0, abs(f)):
            break
    return w, f


def _state_step(obj, w, psi, maxiter=STATE_STEPS):
    shape = psi.shape

    def fun(x):
        z = x[: x.size // 2] + 1j * x[x.size // 2:]
        val, g = obj.gradient(w, z.reshape(shape))
        g = g.ravel()
        return -val, -np.concatenate([g.real, g.imag])

    x0 = np.concatenate([psi.real.ravel(), psi.imag.ravel()])
    f0 = -obj.value(w, psi)
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "gtol": 1e-13, "ftol": 1e-16, "maxcor": 20})
    if res.fun < f0:
        z = res.x[: res.x.size // 2] + 1j * res.x[res.x.size // 2:]
        psi = z.reshape(shape)
    u, _ = obj._normalize(psi)
    return u


def _seesaw(obj, w, psi, cfg, history=None):
    t = obj.terms(psi)
    f = obj.value_from_terms(w, t)
    hist = [f] if history is None else history
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        w, f_w = _weight_step(obj, w, t)
        hist.append(f_w)
        psi = _state_step(obj, w, psi)
        t = obj.terms(psi)
        f_new = obj.value_from_terms(w, t)
        if f_new < f_w:  # never accept a step that lowers the objective
            f_new = f_w
        hist.append(f_new)
        gain = f_new - f
        f = f_new
        if gain <= cfg.rel_tol * max(1.0, abs(f)):
            converged = True
            break
    return w, psi, f, it, converged, hist


def _block_masks(ch, N, rng):
    if not ch.input_blocks:
        return None
    mask = np.zeros((N, ch.dim_in))
    for i in range(N):
        lo, hi = ch.input_blocks[i % len(ch.input_blocks)]
        mask[i, lo:hi] = 1.0
    return mask


def _one_restart(ch, d, cfg, seq, N):
    rng = np.random.default_rng(seq)
    n = ch.dim_in
    psi = rng.standard_normal((N, d, n)) + 1j * rng.standard_normal((N, d, n))
    mask = _block_masks(ch, N, rng)
    obj = PureEnsembleObjective(ch, d, mask)
    psi, _ = obj._normalize(psi)
    w = np.full(N, 1.0 / N)
    return _seesaw(obj, w, psi, cfg)


def _run_restarts(fn, cfg):
    seqs = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.restarts)
    if cfg.n_jobs == 1:
        return [fn(s) for s in seqs]
    from joblib import Parallel, delayed
    return Parallel(n_jobs=cfg.n_jobs)(delayed(fn)(s) for s in seqs)


def restricted_capacity(ch, d, cfg=OptimizerConfig()):
    """Best ensemble value for shared entanglement of dimension d (lower bound on the capacity)."""
    if isinstance(ch, ClassicalChannel):
        from .channels import as_quantum
        ch = as_quantum(ch)
    d = _check_d(ch, d)
    n = ch.dim_in
    N = cfg.ensemble_cap or (n * d) ** 2
    runs = _run_restarts(lambda s: _one_restart(ch, d, cfg, s, N), cfg)
    values = [r[2] for r in runs]
    best = max(range(len(runs)), key=lambda i: (values[i], -i))
    w, psi, f, it, conv, hist = runs[best]
    vec = psi.reshape(N, d * n)
    keep = w > 0
    ens = Ensemble.from_vectors(w[keep], vec[keep], d, n)
    value = evaluate_objective(ch, d, ens)
    return CapacityResult(value, ens, int(sum(r[3] for r in runs)), bool(conv), values, hist,
                          {"best_restart": int(best), "optimizer_value": f})


def holevo_capacity(ch, cfg=OptimizerConfig()):
    """Holevo quantity χ: the d = 1 case of :func:`restricted_capacity`."""
    return restricted_capacity(ch, 1, cfg)


# ---------------------------------------------------------------------------
# entanglement-assisted capacity

def _mutual_info_and_grad(ch, rho):
    """I(ρ) = S(ρ) + S(N(ρ)) - S(N^c(ρ)) and its gradient modulo multiples of I."""
    out = apply(ch, rho)
    env = complementary(ch, rho)
    mats = [rho, out, env]
    val = sum(s * float(batch_entropy(m[None])[0]) for s, m in zip((1, 1, -1), mats))
    L_rho, L_out, L_env = (_hlog(m) for m in mats)
    K = ch.kraus
    # adjoint of the complementary channel: Y ↦ Σ_kl Y_lk K_l^H K_k
    env_adj = np.einsum("lk,lix,kiz->xz", L_env, K.conj(), K)
    G = -L_rho - apply_adjoint(ch, L_out) + env_adj
    G = (G + G.conj().T) / 2
    return val, G


def _expm_h(H):
    w, V = np.linalg.eigh(H)
    e = np.exp(w - w.max())
    R = (V * e) @ V.conj().T
    return R / np.trace(R).real


def ea_capacity(ch, cfg=OptimizerConfig()):
    """Maximal quantum mutual information, by mirror ascent from the maximally mixed state.

    The objective is concave, so the Frank-Wolfe gap max eig(G) - tr(ρG) is a
    certified bound on the distance to the optimum.
    """
    if isinstance(ch, ClassicalChannel):
        from .channels import as_quantum
        ch = as_quantum(ch)
    n = ch.dim_in
    rho = np.eye(n, dtype=complex) / n
    f, G = _mutual_info_and_grad(ch, rho)
    hist = [f]
    t = 1.0
    converged = False
    it = 0
    resid = gap = np.inf
    for it in range(1, cfg.max_iters + 1):
        mu = np.real(np.trace(rho @ G))
        resid = float(np.linalg.norm(G - mu * np.eye(n)))
        gap = float(np.linalg.eigvalsh(G)[-1] - mu)
        if resid <= cfg.rel_tol or gap <= cfg.rel_tol * max(1.0, abs(f)):
            converged = True
            break
        logr = _hlog(rho)
        accepted = False
        t = min(2.0 * t, 1e3)
        while t > 1e-14:
            cand = _expm_h(logr + t * G)
            fc, Gc = _mutual_info_and_grad(ch, cand)
            if fc >= f + 1e-4 * np.real(np.trace(G @ (cand - rho))):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        if fc - f <= cfg.rel_tol * 1e-3 * max(1.0, abs(f)) and gap <= 1e3 * cfg.rel_tol:
            rho, f, G = cand, fc, Gc
            hist.append(f)
            converged = True
            break
        rho, f, G = cand, fc, Gc
        hist.append(f)
    w, V = np.linalg.eigh(rho)
    w = np.maximum(w, 0.0)
    Phi = np.sqrt(w)[:, None] * V.T  # ancilla ⊗ input, ancilla dimension n
    ens = Ensemble.from_vectors([1.0], Phi.reshape(1, -1), n, n)
    value = evaluate_objective(ch, n, ens)
    return CapacityResult(value, ens, it, converged, [value], hist,
                          {"stationarity_residual": resid, "frank_wolfe_gap": gap,
                           "upper_bound": value + max(gap, 0.0), "input_state_spectrum": sorted(w.tolist())})


# ---------------------------------------------------------------------------
# purification transport

def _schmidt_data(xi, m, d):
    xi = check_density_matrix(xi)
    if xi.shape[0] != m * d:
        raise InvalidState(f"state of size {xi.shape[0]} is not {m}x{d}")
    eta = partial_trace(xi, m, d, keep="B")
    lam, U = np.linalg.eigh(eta)
    order = np.argsort(-lam)
    lam, U = lam[order], U[:, order]
    keep = lam > 1e-12
    return xi, lam[keep], U[:, keep]


def minimal_purification_vector(xi, m, d):
    """Minimal purification of tr_m ξ as a (k, d) array: row i is √λ_i u_i."""
    _, lam, U = _schmidt_data(xi, m, d)
    return np.sqrt(lam)[:, None] * U.T


def _kraus_from_choi(J, k, m, tol=1e-14):
    mu, V = np.linalg.eigh((J + J.conj().T) / 2)
    keep = mu > tol * max(mu.max(), 1.0)
    # V[:, r] indexed by (i, a): Kraus K_r[a, i] = sqrt(mu_r) V[i*m + a, r]
    K = np.sqrt(mu[keep])[:, None, None] * V[:, keep].T.reshape(-1, k, m).transpose(0, 2, 1)
    return K


def purification_transport(xi, m, d, purification=None):
    """Channel Φ with (Φ ⊗ id_d)(γγ^H) = ξ for a purification γ of η = tr_m ξ.

    In the Schmidt basis (λ_i, u_i) of η, Φ(e_ij) = ξ_ij / √(λ_i λ_j), where
    ξ_ij = (I ⊗ u_i^H) ξ (I ⊗ u_j); this realizes ξ from the minimal
    purification Σ √λ_i e_i ⊗ u_i. If another purification (a (K, d) array,
    rank of η ≤ K) is supplied, Φ is precomposed with the channel
    a ↦ v a v^H + tr((1 - p) a (1 - p)) e_11 that maps it onto the minimal one.
    """
    xi, lam, U = _schmidt_data(xi, m, d)
    k = lam.size
    T = xi.reshape(m, d, m, d)
    blocks = np.einsum("ci,acbe,ej->ijab", U.conj(), T, U)
    scale = 1.0 / np.sqrt(np.outer(lam, lam))
    J = (blocks * scale[:, :, None, None]).transpose(0, 2, 1, 3).reshape(k * m, k * m)
    Phi = QuantumChannel(_kraus_from_choi(J, k, m), f"transport({m}x{d})")
    if purification is None:
        return Phi
    H = np.asarray(purification, dtype=complex)
    Kdim = H.shape[0]
    W = (H @ U.conj()) / np.sqrt(lam)[None, :]  # columns w_i: Schmidt vectors of the ancilla
    v = W.conj().T  # k x K partial isometry with v w_i = e_i
    P = W @ W.conj().T
    ev, Q = np.linalg.eigh(np.eye(Kdim) - P)
    rest = Q[:, ev > 0.5]
    L = [v]
    for r in range(rest.shape[1]):
        E = np.zeros((k, Kdim), dtype=complex)
        E[0] = rest[:, r].conj()
        L.append(E)
    L = np.array(L)
    K = np.einsum("rab,sbc->rsac", Phi.kraus, L).reshape(-1, m, Kdim)
    return QuantumChannel(K, f"transport({m}x{d}, ancilla {Kdim})")


def apply_first_factor(ch, X, d):
    """(N ⊗ id_d)(X) for X on C^dim_in ⊗ C^d."""
    n, m = ch.dim_in, ch.dim_out
    T = np.asarray(X, dtype=complex).reshape(n, d, n, d)
    K = ch.kraus
    out = np.einsum("kyx,xazb,kwz->yawb", K, T, K.conj())
    return out.reshape(m * d, m * d)


def transport_residual(xi, m, d, Phi, purification=None):
    """||(Φ ⊗ id)(γγ^H) - ξ||_1, γ the minimal purification unless given."""
    from .linalg import schatten_norm
    H = minimal_purification_vector(xi, m, d) if purification is None else np.asarray(purification)
    g = H.reshape(-1)
    rec = apply_first_factor(Phi, np.outer(g, g.conj()), d)
    return schatten_norm(rec - np.asarray(xi), 1)
