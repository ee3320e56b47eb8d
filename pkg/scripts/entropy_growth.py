"""Half-chain entanglement entropy under two-site TDVP for several Rabi frequencies (n=10, zero detuning)."""

import numpy as np

from rydberg_qelm.hamiltonian import ChainSpec, build_mpo
from rydberg_qelm.mps import product_state
from rydberg_qelm.tdvp import EvolutionConfig, evolve

cfg = EvolutionConfig(method="two-site", record_entropy=True, record_energy=False)
for k in (1, 2, 4):
    tr = evolve(product_state(10), build_mpo(ChainSpec(n=10, omega=k * np.pi)), cfg)
    s = tr.half_chain_entropy()
    print(f"Omega = {k}pi  S(t) = {np.round(s, 4).tolist()}  max chi {tr.max_chi.max()}")
