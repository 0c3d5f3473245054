"""Norm side: summing norms of channel adjoints and the f(q) = q ln π_q curve.

For a channel N with adjoint N*, the capacity with d-dimensional shared
entanglement equals the slope of π_{q,d}(N*) at p = 1 (p the conjugate
exponent of q), and f(q) = q ln π_{q,d}(N*) decreases towards it. This
module evaluates f for classical channels, where π_q has a Pietsch minimax
formula, and for covariant quantum channels, where
π_{q,d}(N*) = n^{1/q} ||N: S_1 -> S_p||_d.
"""
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .capacity import OptimizerConfig, _check_d, _hlog, ea_capacity
from .channels import (ClassicalChannel, QuantumChannel, apply, classical_identity, depolarizing,
                       direct_sum_channel, restrict_output, support_projector)
from .entropy import batch_entropy
from .exceptions import EmptyGrid, InvalidN, InvalidP, InvalidQ, NotCovariant, RouteDisagreement

DEFAULT_Q_GRID = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0)
RICHARDSON_STEPS = (1e-2, 5e-3, 2.5e-3)
ROUTE_TOL = 5e-2
COVARIANCE_TOL = 1e-9


@dataclass
class SummingNormEstimate:
    value: float
    method: str  # pietsch-minimax | covariant-closed-form | pure-state-seesaw
    certified: bool = False
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class NormSample:
    q: float
    p: float
    pi_q: float
    f_q: float
    certified: bool


@dataclass
class NormCurve:
    samples: List[NormSample]
    label: str
    d: int
    method: str = ""

    @property
    def upper(self):
        return min(s.f_q for s in self.samples)

    @property
    def certified(self):
        return all(s.certified for s in self.samples)

    def is_monotone(self, tol=1e-6):
        f = [s.f_q for s in self.samples]
        return all(b <= a + tol for a, b in zip(f, f[1:]))

    def to_csv(self):
        from .report import format_float
        rows = ["q,p,pi_q,f_q,certified"]
        for s in self.samples:
            rows.append(",".join([format_float(s.q), format_float(s.p), format_float(s.pi_q),
                                  format_float(s.f_q), "true" if s.certified else "false"]))
        return "\n".join(rows) + "\n"


@dataclass
class CapacitySandwich:
    lower: object  # CapacityResult
    upper: float
    gap: float
    q_grid: Tuple[float, ...]
    warning: bool
    curve: Optional[NormCurve] = None


def conjugate(q):
    return q / (q - 1.0)


def _check_q(q):
    q = float(q)
    if not q > 1:
        raise InvalidQ(f"q must exceed 1, got {q}")
    return q


# ---------------------------------------------------------------------------
# classical Pietsch minimax

def _pietsch_primal(A, lam, p):
    """max_t Σ_i A_ti λ_i^(1-p), the p-th power of the Pietsch bound at λ."""
    return float(np.max(A @ lam ** (1.0 - p)))


def classical_psumming_norm(T, q, iters=2000, tol=1e-10, temps=(1e-2, 1e-5)):
    """π_q of T: ℓ_∞^n -> ℓ_∞^m through the Pietsch minimax formula.

    π_q(T)^p = inf_λ max_t Σ_i |T_ti|^p λ_i^(1-p) over probability vectors λ,
    with p the conjugate exponent of q. A smoothed exponentiated-gradient
    descent gives a first λ; the concave dual
    max_μ (Σ_i ((A^T μ)_i)^(1/p))^p, whose optimizer induces λ_i ∝ (A^T μ)_i^(1/p),
    then tightens it and supplies a lower bound. The reported value is the
    primal formula evaluated at the best λ found, so it is never below π_q.
    """
    q = _check_q(q)
    p = conjugate(q)
    T = np.abs(np.atleast_2d(np.asarray(T, dtype=float)))
    cols = np.flatnonzero(T.sum(axis=0) > 0)
    if cols.size == 0:
        return SummingNormEstimate(0.0, "pietsch-minimax", True, {"lambda": [0.0] * T.shape[1]})
    A = T[:, cols] ** p
    nc = cols.size
    s = p - 1.0

    # stage 1: smoothed primal descent in log-coordinates
    lam = np.full(nc, 1.0 / nc)
    best_lam, best = lam.copy(), _pietsch_primal(A, lam, p)
    mu = np.full(A.shape[0], 1.0 / A.shape[0])
    for it in range(iters):
        tau = temps[0] * (temps[1] / temps[0]) ** (it / max(iters - 1, 1))
        r = lam ** -s
        g = A @ r
        z = np.log(g) / tau
        mu = np.exp(z - z.max())
        mu /= mu.sum()
        # gradient of the smoothed max of ln g_t, times λ (multiplicative coordinates)
        grad = -s * (mu / g) @ (A * r[None, :])
        step = 0.5 / max(np.abs(grad).max(), 1e-300)
        lam_new = lam * np.exp(-step * grad)
        lam_new /= lam_new.sum()
        val = _pietsch_primal(A, lam_new, p)
        if val < best:
            best, best_lam = val, lam_new.copy()
        if np.abs(lam_new - lam).max() <= tol:
            lam = lam_new
            break
        lam = lam_new

    # stage 2: dual ascent, with λ induced by μ (gap certificate)
    def dual(mu):
        c = A.T @ mu
        return float(np.sum(c ** (1.0 / p)) ** p), c

    lower, c = dual(mu)
    for _ in range(5000):
        cp = c ** (1.0 / p)
        lam_mu = cp / cp.sum()
        val = _pietsch_primal(A, lam_mu, p)
        if val < best:
            best, best_lam = val, lam_mu
        grad = A @ (c ** (1.0 / p - 1.0)) * cp.sum() ** (p - 1.0)
        if best - lower <= tol * best:
            break
        eta = 1.0
        improved = False
        while eta > 1e-12:
            z = np.log(np.maximum(mu, 1e-300)) + eta * (grad / lower - 1.0)
            mu_new = np.exp(z - z.max())
            mu_new /= mu_new.sum()
            lo_new, c_new = dual(mu_new)
            if lo_new >= lower:
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
        gain = lo_new - lower
        mu, lower, c = mu_new, lo_new, c_new
        if gain <= 1e-16 * lower:
            break

    # stage 3: polish on the epigraph form when a gap remains
    if best - lower > tol * best and nc > 1:
        best, best_lam = _polish(A, p, best_lam, best)
    lam_full = np.zeros(T.shape[1])
    lam_full[cols] = best_lam
    value = best ** (1.0 / p)
    return SummingNormEstimate(value, "pietsch-minimax", True,
                               {"lambda": lam_full.tolist(), "dual_lower_bound": max(lower, 0.0) ** (1.0 / p),
                                "gap": value - max(lower, 0.0) ** (1.0 / p), "q": q, "p": p})


def _polish(A, p, lam0, f0):
    nc = lam0.size
    ref = f0
    scale = max(p - 1.0, 1e-12)

    def g(lam):
        return (A @ np.maximum(lam, 1e-300) ** (1.0 - p) - ref) / scale

    x0 = np.concatenate([lam0, [np.max(g(lam0))]])
    cons = [{"type": "ineq", "fun": lambda x: x[-1] - g(x[:-1])},
            {"type": "eq", "fun": lambda x: np.sum(x[:-1]) - 1.0}]
    bounds = [(1e-15, 1.0)] * nc + [(None, None)]
    try:
        with warnings.catch_warnings():
            # SLSQP may step slightly outside the bounds; the result is clipped below anyway
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(lambda x: x[-1], x0, jac=lambda x: np.r_[np.zeros(nc), 1.0], method="SLSQP",
                           constraints=cons, bounds=bounds, options={"ftol": 1e-15, "maxiter": 500})
        lam = np.clip(res.x[:-1], 1e-300, None)
        lam /= lam.sum()
        val = _pietsch_primal(A, lam, p)
        if val < f0:
            return val, lam
    except (ValueError, FloatingPointError):
        pass
    return f0, lam0


def classical_adjoint(ch):
    """Matrix of N*: ℓ_∞^m -> ℓ_∞^n for a classical channel, (N* f)(x) = Σ_y p(y|x) f(y)."""
    M = ch.matrix if isinstance(ch, ClassicalChannel) else ch.classical
    return np.asarray(M).T


def classical_norm_derivative(ch, steps=RICHARDSON_STEPS, **kw):
    """Richardson-extrapolated slope of π_q(N*) in p at p = 1 (π equals 1 there)."""
    T = classical_adjoint(ch)
    hs = list(steps)
    D = []
    for h in hs:
        p = 1.0 + h
        est = classical_psumming_norm(T, conjugate(p), **kw)
        D.append((est.value - 1.0) / h)
    return richardson(hs, D), D


def richardson(hs, values):
    """Extrapolate values(h) -> h = 0 assuming an expansion in integer powers of h."""
    table = [list(values)]
    hs = list(hs)
    for level in range(1, len(values)):
        prev = table[-1]
        row = []
        for i in range(len(prev) - 1):
            # Neville step for the interpolating polynomial in h, evaluated at h = 0
            a, b = hs[i], hs[i + level]
            row.append((a * prev[i + 1] - b * prev[i]) / (a - b))
        table.append(row)
    return table[-1][0]


# ---------------------------------------------------------------------------
# the d-restricted 1 -> p norm of a channel over pure bipartite inputs

class _PureStateRatio:
    """Quantities of a single pure ψ ∈ C^d ⊗ C^n pushed through id_d ⊗ N."""

    def __init__(self, ch, d):
        self.K = np.asarray(ch.kraus)
        self.Kc = self.K.conj()
        self.d, self.n, self.m = d, ch.dim_in, ch.dim_out

    def _parts(self, x):
        z = x[: x.size // 2] + 1j * x[x.size // 2:]
        Psi = z.reshape(self.d, self.n)
        phi = np.tensordot(Psi, self.K, axes=([1], [2])).transpose(1, 0, 2)  # (k, d, m)
        flat = phi.reshape(-1, self.d * self.m)
        omega = flat.T @ flat.conj()
        tau = Psi @ Psi.conj().T
        return Psi, phi, flat, omega, tau

    def _pullback(self, M, flat):
        """(id ⊗ N*)(M) ψ, from M applied to the vectors (I ⊗ K_k) ψ."""
        Y = (flat @ M.T).reshape(-1, self.d, self.m)
        return np.tensordot(Y, self.Kc, axes=([0, 2], [0, 1]))

    @staticmethod
    def _pack(g):
        g = g.ravel()
        return np.concatenate([g.real, g.imag])

    def log_ratio(self, x, p):
        """ln(||ω||_p / ||τ||_p) and its gradient; the ratio is invariant under scaling ψ."""
        Psi, phi, flat, omega, tau = self._parts(x)
        wo, Vo = np.linalg.eigh(omega)
        wt, Vt = np.linalg.eigh(tau)
        wo, wt = np.maximum(wo, 0.0), np.maximum(wt, 0.0)
        so, st = np.sum(wo ** p), np.sum(wt ** p)
        val = (np.log(so) - np.log(st)) / p
        Po = (Vo * np.where(wo > 0, wo, 0.0) ** (p - 1.0)) @ Vo.conj().T
        Pt = (Vt * np.where(wt > 0, wt, 0.0) ** (p - 1.0)) @ Vt.conj().T
        g = 2.0 * (self._pullback(Po, flat) / so - (Pt @ Psi) / st)
        return val, self._pack(g)

    def entropy_gap(self, x):
        """S(τ) - S(ω) for the normalized ψ and its gradient."""
        nrm2 = np.sum(x ** 2)
        Psi, phi, flat, omega, tau = self._parts(x)
        omega, tau = omega / nrm2, tau / nrm2
        val = float(batch_entropy(tau[None])[0] - batch_entropy(omega[None])[0])
        G = -_hlog(tau) @ Psi + self._pullback(_hlog(omega), flat)
        G = G / nrm2
        proj = np.real(np.vdot(Psi.ravel(), G.ravel())) / nrm2
        g = 2.0 * (G - proj * Psi)
        return val, self._pack(g)

    def ratio_at(self, psi_vec, p):
        x = np.concatenate([psi_vec.real, psi_vec.imag])
        return float(np.exp(self.log_ratio(x, p)[0]))


def max_entangled_vector(d, n):
    """(1/√d) Σ_{a<d} e_a ⊗ e_a in C^d ⊗ C^n."""
    v = np.zeros((d, n), dtype=complex)
    v[np.arange(d), np.arange(d)] = 1.0 / np.sqrt(d)
    return v.ravel()


def _starts(d, n, cfg):
    seqs = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.restarts)
    out = [max_entangled_vector(d, n)]
    for s in seqs:
        rng = np.random.default_rng(s)
        v = rng.standard_normal(d * n) + 1j * rng.standard_normal(d * n)
        out.append(v / np.linalg.norm(v))
    return out


def _maximize(fun, starts, cfg):
    best_val, best_x, vals = -np.inf, None, []
    for v in starts:
        x0 = np.concatenate([v.real, v.imag])
        res = minimize(lambda x: tuple(-a for a in fun(x)), x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": cfg.max_iters, "gtol": 1e-14, "ftol": 1e-16, "maxcor": 30})
        val0 = fun(x0)[0]
        x, val = (res.x, -res.fun) if -res.fun >= val0 else (x0, val0)
        vals.append(float(val))
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x, vals


def _full_support(ch):
    P = support_projector(ch)
    return ch if P is None else restrict_output(ch, P)


def channel_norm_1p_d(ch, p, d, cfg=OptimizerConfig()):
    """Best value of ||(id_d ⊗ N)(ψψ^H)||_p / ||tr_n ψψ^H||_p over unit ψ ∈ C^d ⊗ C^n.

    Restarts cover the maximally entangled vector on the first d input levels
    plus cfg.restarts random vectors. The result is a lower estimate of the
    d-restricted 1 -> p norm; for d = 1 it is exact.
    """
    p = float(p)
    if not 1.0 < p <= 2.0:
        raise InvalidP(f"p must lie in (1, 2], got {p}")
    d = _check_d(ch, d)
    ch = _full_support(ch)
    R = _PureStateRatio(ch, d)
    val, x, vals = _maximize(lambda x: R.log_ratio(x, p), _starts(d, ch.dim_in, cfg), cfg)
    return SummingNormEstimate(float(np.exp(val)), "pure-state-seesaw", d == 1,
                               {"p": p, "d": d, "restart_values": [float(np.exp(v)) for v in vals],
                                "psi": (x[: x.size // 2] + 1j * x[x.size // 2:])})


# ---------------------------------------------------------------------------
# covariance

def check_covariance(ch, unitaries, tol=COVARIANCE_TOL):
    """Check the unitary 1-design condition and N(π x π^H) = σ N(x) σ^H on matrix units."""
    n = ch.dim_in
    pairs = list(unitaries or [])
    basis = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            basis.append(E)
    design_err = np.inf
    if pairs:
        design_err = 0.0
        for E in basis:
            avg = sum(u @ E @ u.conj().T for u, _ in pairs) / len(pairs)
            design_err = max(design_err, np.abs(avg - np.trace(E) * np.eye(n) / n).max())
    inter_errs = []
    for u, s in pairs:
        err = 0.0
        for E in basis:
            lhs = apply(ch, u @ E @ u.conj().T)
            rhs = s @ apply(ch, E) @ s.conj().T
            err = max(err, np.abs(lhs - rhs).max())
        inter_errs.append(float(err))
    design_ok = bool(design_err <= tol)
    inter_ok = bool(pairs) and all(e <= tol for e in inter_errs)
    return {"design": design_ok, "intertwining": inter_ok, "covariant": design_ok and inter_ok,
            "design_error": float(design_err), "intertwining_errors": inter_errs}


def _require_covariant(ch, unitaries=None):
    pairs = unitaries if unitaries is not None else ch.symmetry
    if not pairs:
        raise NotCovariant(f"no covariance group known for channel {ch.label!r}")
    rep = check_covariance(ch, pairs)
    if not rep["covariant"]:
        raise NotCovariant(f"channel {ch.label!r} fails the covariance check: {rep}")
    return rep


def covariant_psumming(ch, q, d, cfg=OptimizerConfig(), unitaries=None):
    """π_{q,d}(N*) = n^{1/q} ||N: S_1 -> S_p||_d for covariant channels."""
    q = _check_q(q)
    _require_covariant(ch, unitaries)
    p = conjugate(q)
    est = channel_norm_1p_d(ch, p, d, cfg)
    n = ch.dim_in
    diag = dict(est.diagnostics)
    diag["one_to_p_norm"] = est.value
    return SummingNormEstimate(n ** (1.0 / q) * est.value, "covariant-closed-form", est.certified, diag)


# ---------------------------------------------------------------------------
# curves, sandwiches and the derivative estimate

def _is_classical(ch):
    return isinstance(ch, ClassicalChannel) or getattr(ch, "classical", None) is not None


def capacity_upper_from_norm(ch, d, q_grid=DEFAULT_Q_GRID, cfg=OptimizerConfig()):
    """Sample f(q) = q ln π_{q,d}(N*) on q_grid; returns (curve, min f)."""
    grid = [float(q) for q in q_grid]
    if not grid:
        raise EmptyGrid("q_grid is empty")
    for q in grid:
        _check_q(q)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidQ("q_grid must be strictly ascending")
    samples = []
    if _is_classical(ch):
        T = classical_adjoint(ch)
        method = "pietsch-minimax"
        for q in grid:
            est = classical_psumming_norm(T, q)
            samples.append(NormSample(q, conjugate(q), est.value, q * np.log(est.value), True))
    else:
        _check_d(ch, d)
        _require_covariant(ch)
        method = "covariant-closed-form"
        for q in grid:
            est = covariant_psumming(ch, q, d, cfg)
            samples.append(NormSample(q, conjugate(q), est.value, q * np.log(est.value), est.certified))
    curve = NormCurve(samples, getattr(ch, "label", ""), int(d), method)
    return curve, curve.upper


def sandwich(ch, d, cfg=OptimizerConfig(), q_grid=DEFAULT_Q_GRID):
    """Ensemble lower bound and min_q f(q) upper bound for the same capacity."""
    from .capacity import blahut_arimoto, restricted_capacity
    curve, upper = capacity_upper_from_norm(ch, d, q_grid, cfg)
    if isinstance(ch, ClassicalChannel):
        lower = blahut_arimoto(ch, cfg)
    else:
        lower = restricted_capacity(ch, d, cfg)
    return CapacitySandwich(lower, float(upper), float(upper - lower.value), tuple(float(q) for q in q_grid),
                            not curve.certified, curve)


@dataclass
class DerivativeEstimate:
    value: float  # route (ii)
    route_i: float
    route_ii: float
    difference_quotients: List[float]
    steps: Tuple[float, ...]

    def __float__(self):
        return float(self.value)


def entropy_gap_max(ch, d, cfg=OptimizerConfig()):
    """max over pure ψ ∈ C^d ⊗ C^n of S(tr_n ψψ^H) - S((id_d ⊗ N)(ψψ^H))."""
    R = _PureStateRatio(ch, d)
    val, x, vals = _maximize(R.entropy_gap, _starts(d, ch.dim_in, cfg), cfg)
    return float(val), vals


def derivative_capacity_estimate(ch, d, cfg=OptimizerConfig(), steps=RICHARDSON_STEPS, tol=ROUTE_TOL):
    """ln n plus the slope at p = 1 of the d-restricted 1 -> p norm, computed two ways.

    Route (ii), the returned value, maximizes the slope of each pure-state
    ratio, S(tr_n ψψ^H) - S((id ⊗ N)(ψψ^H)). Route (i) extrapolates
    difference quotients of ln ||N||_{1->p,d} at p = 1 + h.
    """
    _require_covariant(ch)
    d = _check_d(ch, d)
    n = ch.dim_in
    gap, _ = entropy_gap_max(ch, d, cfg)
    route_ii = np.log(n) + gap
    D = []
    for h in steps:
        est = channel_norm_1p_d(ch, 1.0 + h, d, cfg)
        D.append(np.log(est.value) / h)
    route_i = np.log(n) + richardson(steps, D)
    if abs(route_i - route_ii) > tol:
        raise RouteDisagreement(f"routes disagree: {route_i:.6f} vs {route_ii:.6f}", route_i, route_ii)
    return DerivativeEstimate(float(route_ii), float(route_i), float(route_ii), [float(v) for v in D], tuple(steps))


# ---------------------------------------------------------------------------
# two-copy non-additivity

def nonadditivity_demo(n, cfg=OptimizerConfig(), q_grid=DEFAULT_Q_GRID, lam=2.0 / 3.0, slack=2e-3):
    """Inequality chain showing C^n(N ⊗ N) - 2 C^{√n}(N) > 0 for N = N1 ⊕ N2.

    N1 is the classical identity on n levels and N2 the depolarizing channel
    with parameter 2/3. The upper bound C^{√n}(N) <= ln n uses
    ||N1||_{1->p,√n} = 1 and lim_q q ln ||N2||_{1->p,√n} <= 0; the lower bound
    C^n(N ⊗ N) >= ln n + C_E(N2) feeds the first copy through N1 and the
    second, entanglement assisted, through N2.
    """
    if int(n) != n or n < 4:
        raise InvalidN(f"n must be a perfect square of at least 4, got {n}")
    n = int(n)
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise InvalidN(f"n must be a perfect square, got {n}")
    N1 = classical_identity(n)
    N2 = depolarizing(n, lam)
    N = direct_sum_channel(N1, N2)
    ln_n = float(np.log(n))

    # upper side: f-values of the direct sum from the two blocks
    rows = []
    for q in q_grid:
        p = conjugate(q)
        a = channel_norm_1p_d(N1, p, d, cfg).value
        b = channel_norm_1p_d(N2, p, d, cfg).value
        pi_n1 = classical_psumming_norm(np.eye(n), q).value
        rows.append({"q": float(q), "norm_n1": a, "norm_n2": b, "pi_q_n1": pi_n1,
                     "f_q": ln_n + q * np.log(max(a, b))})
    # lim_q q ln ||N2||_{1->p,d}: the slope of the norm at p = 1
    slope_n2, _ = entropy_gap_max(N2, d, cfg)
    eq18_ok = -np.log(2.0) - slack <= slope_n2 <= slack
    n1_unit = all(abs(r["norm_n1"] - 1.0) <= 1e-9 for r in rows)
    upper = ln_n  # holds when both checks pass
    from .capacity import blahut_arimoto
    from .channels import ClassicalChannel as _CC
    c1_n1 = blahut_arimoto(_CC(np.eye(n)), cfg).value
    f_n1 = [q * np.log(r["pi_q_n1"]) for q, r in zip(q_grid, rows)]

    # lower side
    ea = ea_capacity(N2, cfg)
    lower_two_copy = ln_n + ea.value
    gap_lower = lower_two_copy - 2.0 * upper
    floor = ln_n / 3.0 - np.log(2.0)
    depol_bound = lam * np.log(n * n) - np.log(2.0)
    certified = bool(floor > 0 and eq18_ok and n1_unit and gap_lower >= floor - slack)
    warnings = []
    if floor <= 0:
        warnings.append(f"gap floor {floor:.6f} is not positive at n={n}; non-additivity is not certified")
    if not eq18_ok:
        warnings.append("slope of the depolarizing block falls outside [-ln 2, 0]")
    if not n1_unit:
        warnings.append("classical identity block norm differs from 1")
    return {
        "n": n, "d": d, "lambda": lam, "direct_sum_label": N.label,
        "capacity_n1": c1_n1,
        "f_q_n1": f_n1,
        "norm_rows": rows,
        "slope_n2": slope_n2,
        "upper_bound_sqrt_n": upper,
        "ea_capacity_n2": ea.value,
        "ea_lower_bound_from_depolarizing": depol_bound,
        "lower_bound_two_copy": lower_two_copy,
        "gap_lower_bound": gap_lower,
        "gap_floor": floor,
        "certified": certified,
        "warnings": warnings,
    }
