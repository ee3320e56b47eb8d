import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydberg_qelm.tensor import contract, krylov_expm_apply, truncated_svd


def _loop_contract(a, b):
    out = np.zeros((a.shape[0], a.shape[1], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for m in range(b.shape[1]):
                for k in range(a.shape[2]):
                    out[i, j, m] += a[i, j, k] * b[k, m]
    return out


def _crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_contract_identity_and_pauli():
    assert np.allclose(contract(np.eye(2), [1], np.array([1.0, 2.0]), [0]), [1, 2])
    x = np.array([[0, 1], [1, 0]])
    assert np.array_equal(contract(x, [1], np.array([[1], [0]]), [0]), [[0], [1]])


def test_contract_matches_loops(rng):
    a = _crandn(rng, 3, 4, 5)
    b = _crandn(rng, 5, 2)
    assert np.allclose(contract(a, [2], b, [0]), _loop_contract(a, b), atol=1e-12)


def test_contract_rejects_mismatch():
    with pytest.raises(ValueError):
        contract(np.ones((2, 3)), [1], np.ones((2, 3)), [0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_contract_bilinear(seed, alpha):
    rng = np.random.default_rng(seed)
    a1, a2 = _crandn(rng, 3, 4), _crandn(rng, 3, 4)
    b = _crandn(rng, 4, 2)
    lhs = contract(alpha * a1 + a2, [1], b, [0])
    rhs = alpha * contract(a1, [1], b, [0]) + contract(a2, [1], b, [0])
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, abs(alpha)) * 10


def test_svd_rank_one(rng):
    u, v = _crandn(rng, 6), _crandn(rng, 5)
    res = truncated_svd(np.outer(u, v), 1, chi_max=10)
    assert res.rank == 1
    assert res.discarded_weight < 1e-28


def test_svd_cutoff_acts_on_squared_weight():
    # sigma = 1e-9 carries relative weight 1e-18
    assert truncated_svd(np.diag([1.0, 1e-9]), 1, chi_max=2, cutoff=1e-19).rank == 2
    assert truncated_svd(np.diag([1.0, 1e-9]), 1, chi_max=2, cutoff=1e-12).rank == 1
    assert truncated_svd(np.diag([1.0, 1e-5]), 1, chi_max=2, cutoff=1e-12).rank == 2


def test_svd_eckart_young(rng):
    m = rng.normal(size=(8, 8))
    full = np.linalg.svd(m, compute_uv=False)
    res = truncated_svd(m, 1, chi_max=3, cutoff=0.0)
    approx = (res.u * res.s) @ res.vh
    assert np.isclose(np.linalg.norm(m - approx), np.sqrt(np.sum(full[3:] ** 2)), rtol=1e-10)
    assert np.isclose(res.discarded_weight, np.sum(full[3:] ** 2) / np.sum(full**2), rtol=1e-10)
    assert np.linalg.norm(m - approx) <= np.sqrt(res.discarded_weight) * np.linalg.norm(m) * (1 + 1e-12)


def test_svd_zero_tensor():
    res = truncated_svd(np.zeros((2, 3, 2)), 2, chi_max=4)
    assert res.rank == 1 and res.s[0] == 0.0 and res.discarded_weight == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 3))
def test_svd_isometries_and_exact_reconstruction(seed, a, b, c):
    rng = np.random.default_rng(seed)
    t = _crandn(rng, a, 2, b, c)
    res = truncated_svd(t, 2, chi_max=64, cutoff=0.0)
    u = res.u.reshape(-1, res.rank)
    vh = res.vh.reshape(res.rank, -1)
    assert np.max(np.abs(u.conj().T @ u - np.eye(res.rank))) < 1e-10
    assert np.max(np.abs(vh @ vh.conj().T - np.eye(res.rank))) < 1e-10
    assert np.all(np.diff(res.s) <= 1e-14) and np.all(res.s >= 0)
    recon = np.tensordot(res.u * res.s, res.vh, axes=(2, 0))
    assert np.linalg.norm(recon - t) < 1e-10 * max(1.0, np.linalg.norm(t))


def test_krylov_eigenvector_phase():
    z = np.diag([1.0, -1.0])
    v = np.array([1.0, 0.0])
    out, ok = krylov_expm_apply(lambda x: z @ x, v, -1j * np.pi)
    assert ok
    assert np.allclose(out, [-1.0, 0.0], atol=1e-12)


def test_krylov_zero_generator(rng):
    v = _crandn(rng, 7)
    out, ok = krylov_expm_apply(lambda x: 0 * x, v, 3.0 - 2.0j)
    assert ok and np.allclose(out, v, atol=1e-14)


def test_krylov_matches_dense(rng):
    a = _crandn(rng, 16, 16)
    h = a + a.conj().T
    v = _crandn(rng, 16)
    out, ok = krylov_expm_apply(lambda x: h @ x, v, -0.5j)
    w, q = np.linalg.eigh(h)
    ref = q @ (np.exp(-0.5j * w) * (q.conj().T @ v))
    assert ok
    assert np.max(np.abs(out - ref)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 2.0))
def test_krylov_preserves_norm(seed, t):
    rng = np.random.default_rng(seed)
    a = _crandn(rng, 12, 12)
    h = a + a.conj().T
    v = _crandn(rng, 12)
    out, _ = krylov_expm_apply(lambda x: h @ x, v, -1j * t)
    assert abs(np.linalg.norm(out) - np.linalg.norm(v)) < 1e-10 * np.linalg.norm(v)


def test_krylov_flags_nonconvergence(rng):
    a = _crandn(rng, 40, 40)
    h = a + a.conj().T
    _, ok = krylov_expm_apply(lambda x: h @ x, _crandn(rng, 40), -5j, krylov_dim=3)
    assert not ok


def test_krylov_rejects_zero_vector():
    with pytest.raises(ValueError):
        krylov_expm_apply(lambda x: x, np.zeros(3), -1j)


def test_krylov_keeps_tensor_shape(rng):
    t = _crandn(rng, 2, 2, 3)
    out, _ = krylov_expm_apply(lambda x: 2.0 * x, t, -0.1j)
    assert out.shape == t.shape
    assert np.allclose(out, np.exp(-0.2j) * t)
