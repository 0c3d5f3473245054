import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import cmat
from qcap import channels as C
from qcap.exceptions import DimensionMismatch, InvalidParameter
from qcap.linalg import inner, random_density_matrix

seeds = st.integers(0, 2**32 - 1)


def _omega(n):
    v = np.eye(n).reshape(-1)
    return np.outer(v, v)


def test_depolarizing_action_and_choi():
    rng = np.random.default_rng(0)
    for n, lam in [(2, 0.3), (3, 2 / 3), (4, 0.0), (2, 1.0)]:
        ch = C.depolarizing(n, lam)
        rho = random_density_matrix(n, rng)
        assert np.allclose(C.apply(ch, rho), lam * rho + (1 - lam) * np.eye(n) / n)
        expected = lam * _omega(n) + (1 - lam) / n * np.eye(n * n)
        assert np.allclose(C.choi(ch), expected)
        assert C.validate(ch).valid


def test_identity_choi_is_max_entangled():
    assert np.allclose(C.choi(C.identity_channel(3)), _omega(3))


def test_validate_residuals():
    bad = C.QuantumChannel(0.9 * np.eye(2)[None])
    rep = C.validate(bad)
    assert not rep.valid and np.isclose(rep.tp_residual, 1 - 0.81)
    rep = C.validate(C.ClassicalChannel(0.9 * np.eye(2)))
    assert not rep.valid and np.isclose(rep.column_sum_residual, 0.1)
    rep = C.validate(C.bsc(0.25))
    assert rep.valid and rep.min_entry == 0.25


def test_amplitude_damping():
    ch = C.amplitude_damping(0.3)
    rho = np.array([[0.2, 0.1], [0.1, 0.8]])
    out = C.apply(ch, rho)
    assert np.allclose(out, [[0.2 + 0.3 * 0.8, np.sqrt(0.7) * 0.1], [np.sqrt(0.7) * 0.1, 0.7 * 0.8]])


def test_classical_embed_acts_on_diagonal():
    M = np.array([[0.7, 0.2, 0.0], [0.3, 0.8, 1.0]])
    ch = C.classical_embed(M)
    assert ch.dim_in == 3 and ch.dim_out == 2 and ch.classical is not None
    p = np.array([0.5, 0.3, 0.2])
    assert np.allclose(C.apply(ch, np.diag(p)), np.diag(M @ p))
    # off-diagonal input entries are erased
    X = np.zeros((3, 3)); X[0, 1] = 1
    assert np.allclose(C.apply(ch, X), 0)


def test_classical_identity_has_symmetry_and_others_do_not():
    assert C.classical_identity(3).symmetry is not None
    assert C.classical_embed([[0.9, 0.1], [0.1, 0.9]]).symmetry is None


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 4), st.integers(1, 3))
def test_duality_random_channels(seed, n, k, m, d):
    assume(m * k >= n)
    rng = np.random.default_rng(seed)
    ch = C.random_channel(n, k, rng, m=m)
    assert C.validate(ch).valid
    X, Y = cmat(rng, n, n), cmat(rng, m, m)
    assert np.isclose(inner(C.apply(ch, X), Y), inner(X, C.apply_adjoint(ch, Y)))
    X, Y = cmat(rng, d * n, d * n), cmat(rng, d * m, d * m)
    assert np.isclose(inner(C.apply_local(ch, X, d), Y), inner(X, C.apply_local_adjoint(ch, Y, d)))


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_adjoint_is_unital_and_choi_psd(seed, n, k):
    rng = np.random.default_rng(seed)
    ch = C.random_channel(n, k, rng)
    assert np.allclose(C.apply_adjoint(ch, np.eye(n)), np.eye(n))
    J = C.choi(ch)
    assert np.linalg.eigvalsh(J).min() > -1e-12
    # tracing out the output of the Choi matrix gives the identity
    assert np.allclose(np.einsum("iaja->ij", J.reshape(n, n, n, n)), np.eye(n))


def test_apply_local_on_product():
    rng = np.random.default_rng(2)
    ch = C.random_channel(2, 2, rng, m=3)
    A, B = cmat(rng, 2, 2), cmat(rng, 2, 2)
    assert np.allclose(C.apply_local(ch, np.kron(A, B), 2), np.kron(A, C.apply(ch, B)))


def test_complementary_channel():
    rng = np.random.default_rng(4)
    ch = C.random_channel(3, 2, rng)
    rho = random_density_matrix(3, rng)
    env = C.complementary(ch, rho)
    assert np.isclose(np.trace(env), 1) and np.linalg.eigvalsh(env).min() > -1e-12
    # pure input: output and environment have equal spectra
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v /= np.linalg.norm(v)
    P = np.outer(v, v.conj())
    a = np.sort(np.linalg.eigvalsh(C.apply(ch, P)))[-2:]
    b = np.sort(np.linalg.eigvalsh(C.complementary(ch, P)))[-2:]
    assert np.allclose(a, b)


def test_heisenberg_weyl_is_unitary_design():
    n = 3
    W = C.heisenberg_weyl(n)
    E = np.zeros((n, n)); E[0, 1] = 1
    avg = sum(u @ E @ u.conj().T for u in W) / n**2
    assert np.allclose(avg, 0)
    assert all(np.allclose(u.conj().T @ u, np.eye(n)) for u in W)


def test_tensor_and_direct_sum():
    rng = np.random.default_rng(6)
    a, b = C.depolarizing(2, 0.4), C.amplitude_damping(0.2)
    t = C.tensor_channel(a, b)
    r1, r2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
    assert np.allclose(C.apply(t, np.kron(r1, r2)), np.kron(C.apply(a, r1), C.apply(b, r2)))
    s = C.direct_sum_channel(a, b)
    assert s.input_blocks == ((0, 2), (2, 4)) and C.validate(s).valid
    X = np.zeros((4, 4), dtype=complex)
    X[:2, :2], X[2:, 2:] = 0.5 * r1, 0.5 * r2
    X[0, 3] = X[3, 0] = 0.3  # coherence between the blocks is discarded
    assert np.allclose(C.apply(s, X), 0.5 * C.apply(a, r1) + 0.5 * C.apply(b, r2))
    with pytest.raises(DimensionMismatch):
        C.direct_sum_channel(a, C.depolarizing(3, 0.5))


def test_construct_and_errors():
    ch = C.construct("depolarizing", n=2, lam=0.5)
    assert ch.dim_in == 2
    with pytest.raises(InvalidParameter):
        C.construct("nope")
    with pytest.raises(InvalidParameter):
        C.construct("depolarizing", n=2)
    with pytest.raises(InvalidParameter):
        C.depolarizing(2, 1.5)
    with pytest.raises(InvalidParameter):
        C.classical_channel([[0.5, 0.5], [0.4, 0.5]])
    with pytest.raises(DimensionMismatch):
        C.apply(ch, np.eye(3))


def test_channels_are_immutable():
    ch = C.depolarizing(2, 0.5)
    with pytest.raises(ValueError):
        ch.kraus[0, 0, 0] = 2.0


def test_support_projector_and_restriction():
    s = C.direct_sum_channel(C.identity_channel(2), C.identity_channel(2))
    assert C.support_projector(s) is None
    ch = C.classical_embed(np.array([[1.0, 1.0], [0.0, 0.0]]))  # output always |0>
    P = C.support_projector(ch)
    assert P.shape == (2, 1)
    r = C.restrict_output(ch, P)
    assert r.dim_out == 1 and C.validate(r).valid


def test_random_channel_needs_room_for_an_isometry():
    with pytest.raises(InvalidParameter):
        C.random_channel(4, 1, np.random.default_rng(0), m=2)
