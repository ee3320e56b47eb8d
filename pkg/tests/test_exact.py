import numpy as np
import pytest

from rydberg_qelm.exact import (
    X,
    basis_state,
    dense_evolve,
    dense_evolve_expm,
    dense_hamiltonian,
    dense_observables,
    half_chain_entropy,
)
from rydberg_qelm.hamiltonian import ChainSpec, InteractionTable, build_interactions


def test_single_site_hamiltonian():
    assert np.allclose(dense_hamiltonian(ChainSpec(n=1, omega=2 * np.pi)), np.pi * X)


def test_detuning_term_sign():
    d = 1.7
    spec = ChainSpec(n=2, omega=0.0, detunings=(d, 0.0))
    h = dense_hamiltonian(spec, InteractionTable(()))
    assert np.allclose(h, np.diag([-d, -d, 0, 0]))


def test_size_guard():
    with pytest.raises(ValueError):
        dense_hamiltonian(ChainSpec(n=13, omega=1.0))


def test_evolve_identity_and_half_rabi():
    psi = basis_state(1)
    h = np.pi * X
    assert np.allclose(dense_evolve(psi, h, 0.0), psi)
    out = dense_evolve(psi, h, 0.5)
    assert np.allclose(out, [0, -1j], atol=1e-12)


def test_two_exponentiation_routes_agree(rng):
    spec = ChainSpec(n=8, omega=2.2 * np.pi, detunings=(2.4 * np.pi,) * 8)
    h = dense_hamiltonian(spec)
    psi = basis_state(8)
    for t in (0.5, 2.0, 4.0):
        a = dense_evolve(psi, h, t)
        b = dense_evolve_expm(psi, h, t)
        assert np.max(np.abs(a - b)) < 1e-10
        assert abs(np.linalg.norm(a) - 1) < 1e-12


def test_evolution_reversible(rng):
    spec = ChainSpec(n=6, omega=3.0, spacing_um=8.0, detunings=tuple(rng.uniform(-6, 6, 6)))
    h = dense_hamiltonian(spec, build_interactions(spec))
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    psi /= np.linalg.norm(psi)
    back = dense_evolve(dense_evolve(psi, h, 1.3), h, -1.3)
    assert np.max(np.abs(back - psi)) < 1e-10


def test_observables_basis_and_ghz():
    obs = dense_observables(basis_state(4))
    assert np.allclose(obs["z"], 1) and np.allclose(obs["zz"], 1) and obs["entropy"] == 0.0
    ghz = np.zeros(16, dtype=complex)
    ghz[0] = ghz[-1] = 1 / np.sqrt(2)
    obs = dense_observables(ghz)
    assert np.allclose(obs["z"], 0)
    assert np.allclose(obs["zz"], 1)
    assert abs(obs["entropy"] - np.log(2)) < 1e-12


def test_zz_symmetric(rng):
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    zz = dense_observables(psi / np.linalg.norm(psi))["zz"]
    assert np.allclose(zz, zz.T)
    assert half_chain_entropy(psi / np.linalg.norm(psi)) > 0
