"""scikit-learn style wrappers around the capacity and norm routines.

The "data" passed to ``fit`` is a channel. Hyperparameters live in
``__init__`` (so ``get_params``/``set_params``/``clone`` work) and fitted
quantities carry a trailing underscore.
"""
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import capacity as _cap
from . import psumming as _ps
from .channels import ClassicalChannel, QuantumChannel
from .exceptions import InvalidParameter


def check_channel(ch, quantum=None):
    """Validate the ``fit`` argument; ``quantum=True`` embeds classical channels."""
    from .channels import as_quantum, validate
    if not isinstance(ch, (QuantumChannel, ClassicalChannel)):
        raise InvalidParameter(f"expected a channel, got {type(ch).__name__}")
    if quantum:
        ch = as_quantum(ch)
    if not validate(ch).valid:
        raise InvalidParameter(f"channel {ch.label!r} is not a valid channel")
    return ch


class _OptimizerMixin:
    def _config(self):
        return _cap.OptimizerConfig(restarts=self.restarts, max_iters=self.max_iters, rel_tol=self.rel_tol,
                                    rng_seed=self.random_state, ensemble_cap=self.ensemble_cap,
                                    n_jobs=self.n_jobs)

    def _store(self, result):
        self.result_ = result
        self.capacity_ = result.value
        self.ensemble_ = result.ensemble
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        return self

    def score(self, channel=None):
        """Fitted capacity in nats (larger is better)."""
        check_is_fitted(self, "capacity_")
        return self.capacity_


class BlahutArimoto(_OptimizerMixin, BaseEstimator):
    def __init__(self, max_iters=1000, rel_tol=1e-10):
        self.max_iters = max_iters
        self.rel_tol = rel_tol

    def fit(self, channel, y=None):
        ch = check_channel(channel)
        cfg = _cap.OptimizerConfig(max_iters=self.max_iters, rel_tol=self.rel_tol)
        self._store(_cap.blahut_arimoto(ch, cfg))
        self.input_distribution_ = self.result_.ensemble.weights
        return self


class RestrictedCapacity(_OptimizerMixin, BaseEstimator):
    """Ensemble optimizer for d-dimensional shared entanglement."""

    def __init__(self, d=1, restarts=8, max_iters=1000, rel_tol=1e-10, random_state=0, ensemble_cap=None,
                 n_jobs=1):
        self.d = d
        self.restarts = restarts
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.random_state = random_state
        self.ensemble_cap = ensemble_cap
        self.n_jobs = n_jobs

    def fit(self, channel, y=None):
        ch = check_channel(channel, quantum=True)
        return self._store(_cap.restricted_capacity(ch, self.d, self._config()))


class HolevoCapacity(RestrictedCapacity):
    def __init__(self, restarts=8, max_iters=1000, rel_tol=1e-10, random_state=0, ensemble_cap=None, n_jobs=1):
        super().__init__(1, restarts, max_iters, rel_tol, random_state, ensemble_cap, n_jobs)

    def get_params(self, deep=True):
        params = super().get_params(deep)
        params.pop("d", None)
        return params


class EntanglementAssistedCapacity(_OptimizerMixin, BaseEstimator):
    def __init__(self, max_iters=1000, rel_tol=1e-10):
        self.max_iters = max_iters
        self.rel_tol = rel_tol

    def fit(self, channel, y=None):
        ch = check_channel(channel, quantum=True)
        cfg = _cap.OptimizerConfig(max_iters=self.max_iters, rel_tol=self.rel_tol)
        self._store(_cap.ea_capacity(ch, cfg))
        self.stationarity_ = self.result_.diagnostics["stationarity_residual"]
        return self


class SummingNormCurve(BaseEstimator):
    """Fit f(q) = q ln π_{q,d}(N*) on a q grid; ``upper_bound_`` is its minimum."""

    def __init__(self, d=1, q_grid=_ps.DEFAULT_Q_GRID, restarts=8, max_iters=1000, random_state=0):
        self.d = d
        self.q_grid = q_grid
        self.restarts = restarts
        self.max_iters = max_iters
        self.random_state = random_state

    def fit(self, channel, y=None):
        ch = check_channel(channel)
        cfg = _cap.OptimizerConfig(restarts=self.restarts, max_iters=self.max_iters, rng_seed=self.random_state)
        self.curve_, self.upper_bound_ = _ps.capacity_upper_from_norm(ch, self.d, self.q_grid, cfg)
        self.certified_ = self.curve_.certified
        return self

    def score(self, channel=None):
        check_is_fitted(self, "upper_bound_")
        return self.upper_bound_
