import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qcap import channels as C
from qcap.entropy import binary_entropy
from qcap.estimators import (BlahutArimoto, EntanglementAssistedCapacity, HolevoCapacity, RestrictedCapacity,
                             SummingNormCurve, check_channel)
from qcap.exceptions import InvalidParameter


def test_get_params_and_clone():
    est = RestrictedCapacity(d=2, restarts=3)
    params = est.get_params()
    assert params["d"] == 2 and params["restarts"] == 3
    c = clone(est)
    assert c.get_params() == params and c is not est
    est.set_params(d=1)
    assert est.d == 1
    assert "d" not in HolevoCapacity().get_params()


def test_blahut_arimoto_estimator():
    est = BlahutArimoto().fit(C.bsc(0.1))
    assert est.score() == pytest.approx(np.log(2) - binary_entropy(0.1))
    assert np.allclose(est.input_distribution_, 0.5) and est.converged_


def test_quantum_estimators():
    ch = C.depolarizing(2, 0.3)
    ea = EntanglementAssistedCapacity().fit(ch)
    h = HolevoCapacity(restarts=2).fit(ch)
    r = RestrictedCapacity(d=2, restarts=2).fit(ch)
    assert h.capacity_ < r.capacity_ <= ea.capacity_ + 1e-9
    assert ea.stationarity_ < 1e-8
    assert len(r.ensemble_) >= 1 and r.n_iter_ >= 1


def test_classical_input_is_embedded_for_quantum_estimators():
    est = HolevoCapacity(restarts=2).fit(C.bsc(0.1))
    assert est.capacity_ == pytest.approx(np.log(2) - binary_entropy(0.1), abs=1e-8)


def test_summing_norm_curve_estimator():
    est = SummingNormCurve(q_grid=(2, 16)).fit(C.classical_identity(3))
    assert est.certified_ and est.score() == pytest.approx(np.log(3))
    assert len(est.curve_.samples) == 2


def test_unfitted_and_bad_inputs():
    with pytest.raises(NotFittedError):
        BlahutArimoto().score()
    with pytest.raises(InvalidParameter):
        check_channel(np.eye(2))
    with pytest.raises(InvalidParameter):
        BlahutArimoto().fit(C.ClassicalChannel(0.9 * np.eye(2)))
