"""Fixed-seed property suites bundled for ``qcap selftest``.

Each check returns a :class:`CheckResult`; ``run_all`` runs every suite and
needs no external data.
"""
import time
from dataclasses import dataclass

import numpy as np

from . import channels as C
from .capacity import OptimizerConfig, PureEnsembleObjective, _block_masks, _mutual_info_and_grad, _seesaw
from .linalg import random_density_matrix, random_unitary, schatten_norm, tensor_product
from .psumming import _PureStateRatio

SEED = 20240521


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float  # largest violation (or error) seen
    tolerance: float
    cases: int
    seconds: float = 0.0

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "worst": self.worst, "tolerance": self.tolerance,
                "cases": self.cases, "seconds": self.seconds}


def _cmat(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_cp(rng, n, m, k):
    """Random completely positive map given by k Kraus operators (not trace preserving)."""
    K = _cmat(rng, k, m, n) / np.sqrt(n)
    return C.QuantumChannel(K, "random-cp")


def check_cauchy_schwarz(rng, trials=40, ps=(1, 2, 4), tol=1e-10):
    """||(id⊗T)(xy)||_p <= ||(id⊗T)(xx^H)||_p^{1/2} ||(id⊗T)(y^H y)||_p^{1/2} for CP T."""
    worst, cases = -np.inf, 0
    for _ in range(trials):
        n, m, kr = rng.integers(2, 4), rng.integers(2, 4), rng.integers(1, 4)
        k = int(rng.integers(1, 3))
        T = _random_cp(rng, n, m, kr)
        x, y = _cmat(rng, k * n, k * n), _cmat(rng, k * n, k * n)
        for p in ps:
            lhs = schatten_norm(C.apply_local(T, x @ y, k), p)
            rhs = np.sqrt(schatten_norm(C.apply_local(T, x @ x.conj().T, k), p)
                          * schatten_norm(C.apply_local(T, y.conj().T @ y, k), p))
            worst = max(worst, (lhs - rhs) / rhs)
            cases += 1
    return CheckResult("cauchy_schwarz_cp", bool(worst <= tol), float(worst), tol, cases)


def check_schatten(rng, trials=40, ps=(1, 1.5, 2, 3, 4, np.inf), tol=1e-10):
    """Schatten norms decrease in p and are invariant under unitaries on both sides."""
    worst, cases = 0.0, 0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        A = _cmat(rng, n, n)
        norms = [schatten_norm(A, p) for p in ps]
        for a, b in zip(norms, norms[1:]):
            worst = max(worst, (b - a) / a)
        U, V = random_unitary(n, rng), random_unitary(n, rng)
        for p, v in zip(ps, norms):
            worst = max(worst, abs(schatten_norm(U @ A @ V, p) - v) / v)
        cases += 1
    return CheckResult("schatten_monotone_unitary", bool(worst <= tol), float(worst), tol, cases)


def _sample_channels(rng):
    out = [C.depolarizing(3, 0.4), C.amplitude_damping(0.3), C.as_quantum(C.bsc(0.2)), C.identity_channel(2),
           C.classical_embed(C.random_stochastic(3, 2, rng))]
    for _ in range(5):
        n, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        k = int(rng.integers(-(-n // m), 4))  # m * k >= n so the isometry exists
        out.append(C.random_channel(n, k, rng, m=m))
    out.append(C.direct_sum_channel(C.identity_channel(2), C.depolarizing(2, 0.5)))
    out.append(C.tensor_channel(C.depolarizing(2, 0.3), C.amplitude_damping(0.5)))
    return out


def check_duality(rng, tol=1e-10):
    """<N(X), Y> = <X, N*(Y)> including the d-extended maps, plus CPTP validation."""
    worst, cases = 0.0, 0
    for ch in _sample_channels(rng):
        if not C.validate(ch).valid:
            worst = np.inf
        n, m = ch.dim_in, ch.dim_out
        for d in (1, 2):
            X, Y = _cmat(rng, d * n, d * n), _cmat(rng, d * m, d * m)
            lhs = np.trace(C.apply_local(ch, X, d).conj().T @ Y)
            rhs = np.trace(X.conj().T @ C.apply_local_adjoint(ch, Y, d))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
            cases += 1
    return CheckResult("channel_duality", bool(worst <= tol), float(worst), tol, cases)


def check_seesaw_monotone(rng, tol=1e-12):
    """Recorded objective values along the ensemble seesaw never decrease."""
    cfg = OptimizerConfig(max_iters=25)
    worst, cases = 0.0, 0
    for ch, d in [(C.depolarizing(2, 0.6), 1), (C.depolarizing(2, 0.6), 2), (C.amplitude_damping(0.4), 1),
                  (C.random_channel(3, 2, rng), 1),
                  (C.direct_sum_channel(C.identity_channel(2), C.depolarizing(2, 0.5)), 2)]:
        N = (ch.dim_in * d) ** 2
        obj = PureEnsembleObjective(ch, d, _block_masks(ch, N, rng))
        psi, _ = obj._normalize(_cmat(rng, N, d, ch.dim_in))
        _, _, _, _, _, hist = _seesaw(obj, np.full(N, 1.0 / N), psi, cfg)
        drops = np.diff(hist)
        worst = max(worst, float(-drops.min()) if drops.size else 0.0)
        cases += 1
    return CheckResult("seesaw_monotone", bool(worst <= tol), float(worst), tol, cases)


def _fd_error(fun, x, g, rng, h=1e-6):
    v = rng.standard_normal(x.shape)
    fd = (fun(x + h * v) - fun(x - h * v)) / (2 * h)
    an = float(np.real(np.vdot(g, v))) if np.iscomplexobj(g) else float(g @ v)
    return abs(fd - an) / max(1.0, abs(an))


def check_gradients(rng, trials=5, tol=1e-5):
    """Analytic gradients of every smooth objective against central differences."""
    worst, cases = 0.0, 0
    for _ in range(trials):
        ch = C.random_channel(3, 2, rng)
        for d in (1, 2):
            # ensemble objective over complex states; perturb real and imaginary parts
            N = 3
            obj = PureEnsembleObjective(ch, d)
            psi = _cmat(rng, N, d, 3)
            w = rng.dirichlet(np.ones(N))
            _, g = obj.gradient(w, psi)
            x = np.concatenate([psi.real.ravel(), psi.imag.ravel()])
            gx = np.concatenate([g.real.ravel(), g.imag.ravel()])

            def f(x, obj=obj, w=w, shape=psi.shape):
                return obj.value(w, (x[: x.size // 2] + 1j * x[x.size // 2:]).reshape(shape))

            worst = max(worst, _fd_error(f, x, gx, rng))
            R = _PureStateRatio(ch, d)
            y = rng.standard_normal(2 * d * 3)
            for p in (1.3, 2.0):
                worst = max(worst, _fd_error(lambda z: R.log_ratio(z, p)[0], y, R.log_ratio(y, p)[1], rng))
            worst = max(worst, _fd_error(lambda z: R.entropy_gap(z)[0], y, R.entropy_gap(y)[1], rng))
            cases += 4
        # mutual information along a Hermitian direction that keeps the trace
        rho = random_density_matrix(3, rng)
        H = _cmat(rng, 3, 3)
        H = H + H.conj().T
        H -= np.trace(H) / 3 * np.eye(3)
        _, G = _mutual_info_and_grad(ch, rho)
        h = 1e-6
        fd = (_mutual_info_and_grad(ch, rho + h * H)[0] - _mutual_info_and_grad(ch, rho - h * H)[0]) / (2 * h)
        an = float(np.real(np.trace(G @ H)))
        worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
        cases += 1
    return CheckResult("gradient_vs_finite_difference", bool(worst <= tol), float(worst), tol, cases)


def check_kron_convention(rng, tol=1e-12):
    """(id ⊗ N)(A ⊗ B) = A ⊗ N(B) in the row-major Kronecker order."""
    worst = 0.0
    ch = C.random_channel(2, 2, rng, m=3)
    for _ in range(5):
        A, B = _cmat(rng, 2, 2), _cmat(rng, 2, 2)
        lhs = C.apply_local(ch, tensor_product(A, B), 2)
        worst = max(worst, float(np.abs(lhs - np.kron(A, C.apply(ch, B))).max()))
    return CheckResult("kron_convention", bool(worst <= tol), worst, tol, 5)


SUITES = (check_cauchy_schwarz, check_schatten, check_duality, check_seesaw_monotone, check_gradients,
          check_kron_convention)


def run_all(seed=SEED):
    """Run every suite with child generators of one seed; returns a list of CheckResult."""
    results = []
    for suite, child in zip(SUITES, np.random.SeedSequence(seed).spawn(len(SUITES))):
        t0 = time.perf_counter()
        res = suite(np.random.default_rng(child))
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
