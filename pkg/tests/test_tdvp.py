import numpy as np
import pytest

from rydberg_qelm.exact import dense_trace
from rydberg_qelm.hamiltonian import ChainSpec, InteractionTable, MpoOperator, build_mpo
from rydberg_qelm.mps import (
    canonicalize,
    entanglement_entropy,
    expect_z,
    product_state,
    random_mps,
)
from rydberg_qelm.tdvp import (
    EvolutionConfig,
    evolve,
    mpo_expectation,
    tdvp_step_one_site,
    tdvp_step_two_site,
)

PAPER_SPEC = ChainSpec(n=8, omega=2.2 * np.pi, spacing_um=11.0, detunings=(2.4 * np.pi,) * 8)


def _zero_mpo(n):
    return MpoOperator(tuple(np.zeros((1, 2, 2, 1), dtype=complex) for _ in range(n)))


def test_single_qubit_rabi():
    h = build_mpo(ChainSpec(n=1, omega=2 * np.pi))
    state, ok = tdvp_step_one_site(product_state(1), h, 0.25)
    assert ok
    assert abs(expect_z(state, 0) - np.cos(2 * np.pi * 0.25)) < 1e-8
    state, _ = tdvp_step_two_site(product_state(1), h, 0.125)
    assert abs(expect_z(state, 0) - np.cos(2 * np.pi * 0.125)) < 1e-8


def test_null_generator_leaves_state(rng):
    s = random_mps(5, 4, rng)
    h = _zero_mpo(5)
    one, _ = tdvp_step_one_site(s, h, 0.5)
    two, w = tdvp_step_two_site(s, h, 0.5)
    assert w == 0.0
    for out in (one, two):
        assert max(abs(expect_z(out, i) - expect_z(s, i)) for i in range(5)) < 1e-12


def test_one_site_keeps_bond_dims_and_conserves(rng):
    s = random_mps(6, 3, rng)
    spec = ChainSpec(n=6, omega=3.0, spacing_um=8.0, detunings=tuple(rng.uniform(-6, 6, 6)))
    h = build_mpo(spec)
    e0 = mpo_expectation(s, h)
    out, _ = tdvp_step_one_site(s, h, 0.2)
    assert out.bond_dims == s.bond_dims
    assert abs(np.linalg.norm(out.tensors[0]) - 1) < 1e-10
    assert abs(mpo_expectation(out, h) - e0) < 1e-8 * abs(e0)


def test_two_site_grows_entanglement():
    spec = ChainSpec(n=2, omega=2 * np.pi, spacing_um=5.0)
    out, _ = tdvp_step_two_site(product_state(2), build_mpo(spec), 0.3)
    assert out.bond_dims == [2]
    assert entanglement_entropy(canonicalize(out, 0))[0] > 0


def test_product_state_run_is_deterministic_mean_field():
    h = build_mpo(PAPER_SPEC)
    cfg = EvolutionConfig(method="one-site")
    a = evolve(product_state(8), h, cfg)
    b = evolve(product_state(8), h, cfg)
    assert np.array_equal(a.z, b.z) and np.array_equal(a.zz, b.zz)
    assert all(dims == [1] * 7 for dims in a.bond_dims)
    # bond dimension 1: every two-point function factorizes
    zz01 = a.zz[:, a.pairs.index((0, 1))]
    assert np.max(np.abs(zz01 - a.z[:, 0] * a.z[:, 1])) < 1e-12


def test_two_site_matches_oracle():
    h = build_mpo(PAPER_SPEC)
    pairs = [(0, 1)]
    cfg = EvolutionConfig(method="two-site", chi_max=100)
    tr = evolve(product_state(8), h, cfg, pairs=pairs)
    z_ex, zz_ex, _ = dense_trace(PAPER_SPEC, cfg.times, pairs)
    assert np.max(np.abs(tr.z[:, 0] - z_ex[:, 0])) < 0.02
    assert np.max(np.abs(tr.zz[:, 0] - zz_ex[:, 0])) < 0.02
    assert np.max(np.abs(tr.norm - 1)) < 1e-8


def test_evolve_snapshot_grid():
    h = build_mpo(ChainSpec(n=3, omega=1.0))
    tr = evolve(product_state(3), h, EvolutionConfig())
    assert np.allclose(tr.times, [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])
    one = evolve(product_state(3), h, EvolutionConfig(dt=0.5, total_time=0.5))
    assert one.n_snapshots == 1
    with_t0 = evolve(product_state(3), h, EvolutionConfig(total_time=1.0, include_t0=True))
    assert np.allclose(with_t0.times, [0, 0.5, 1.0]) and np.allclose(with_t0.z[0], 1)
    no_pairs = evolve(product_state(3), h, EvolutionConfig(total_time=1.0), pairs=[])
    assert no_pairs.zz.shape == (2, 0) and no_pairs.z.shape == (2, 3)


def test_substep_refinement_is_self_consistent():
    spec = ChainSpec(n=6, omega=2.2 * np.pi, detunings=(2.4 * np.pi,) * 6)
    h = build_mpo(spec)
    z_ex, _, _ = dense_trace(spec, np.array([4.0]), [])
    coarse = evolve(product_state(6), h, EvolutionConfig(method="two-site", inner_substeps=1))
    fine = evolve(product_state(6), h, EvolutionConfig(method="two-site", inner_substeps=2))
    coarse_err = abs(coarse.z[-1, 0] - z_ex[0, 0])
    assert abs(fine.z[-1, 0] - coarse.z[-1, 0]) < coarse_err * 1.5
    assert abs(fine.z[-1, 0] - z_ex[0, 0]) < coarse_err


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0.3, total_time=1.0)
    with pytest.raises(ValueError):
        EvolutionConfig(method="three-site")
    with pytest.raises(ValueError):
        EvolutionConfig(inner_substeps=0)


def test_truncation_alarm_reported():
    spec = ChainSpec(n=8, omega=6 * np.pi, spacing_um=7.0, detunings=tuple(np.linspace(-6, 6, 8)))
    cfg = EvolutionConfig(method="two-site", chi_max=2, total_time=1.0)
    tr = evolve(product_state(8), build_mpo(spec), cfg)
    assert tr.error is None
    assert tr.alarms and tr.discarded_weight[-1] > 0
    assert tr.max_chi.max() <= 2


def test_partial_trace_on_failure(monkeypatch):
    from rydberg_qelm import tdvp

    calls = {"n": 0}
    real = tdvp.TdvpEngine.sweep_one_site

    def flaky(self, dt):
        calls["n"] += 1
        if calls["n"] == 3:
            raise FloatingPointError("boom")
        return real(self, dt)

    monkeypatch.setattr(tdvp.TdvpEngine, "sweep_one_site", flaky)
    tr = evolve(product_state(3), build_mpo(ChainSpec(n=3, omega=1.0)), EvolutionConfig())
    assert tr.n_snapshots == 2
    assert "boom" in tr.error


def test_entropy_recorded_for_two_site_only():
    spec = ChainSpec(n=6, omega=2 * np.pi, spacing_um=9.0)
    h = build_mpo(spec)
    one = evolve(product_state(6), h, EvolutionConfig(method="one-site", record_entropy=True))
    two = evolve(product_state(6), h, EvolutionConfig(method="two-site", record_entropy=True))
    assert np.all(one.entropy == 0.0)
    assert two.entropy.max() > 0


def test_interaction_free_chain_factorizes():
    # no couplings: each site is an independent Rabi oscillator
    spec = ChainSpec(n=4, omega=2 * np.pi, detunings=(0.0,) * 4)
    h = build_mpo(spec, InteractionTable(()))
    tr = evolve(product_state(4), h, EvolutionConfig(method="two-site", dt=0.125, total_time=1.0))
    assert np.max(np.abs(tr.z - np.cos(2 * np.pi * tr.times)[:, None])) < 1e-8
    assert tr.max_chi.max() == 1
