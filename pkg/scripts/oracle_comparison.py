"""One-site vs two-site TDVP against exact state-vector dynamics (n=8).

Prints <Z_1> and <Z_1 Z_2> at each snapshot and the absolute deviations.
"""

import numpy as np

from rydberg_qelm.exact import dense_trace
from rydberg_qelm.hamiltonian import ChainSpec, build_mpo
from rydberg_qelm.mps import product_state
from rydberg_qelm.tdvp import EvolutionConfig, evolve

spec = ChainSpec(n=8, omega=2.2 * np.pi, spacing_um=11.0, detunings=(2.4 * np.pi,) * 8)
pairs = [(0, 1)]
h = build_mpo(spec)
one = evolve(product_state(8), h, EvolutionConfig(method="one-site"), pairs=pairs)
two = evolve(product_state(8), h, EvolutionConfig(method="two-site"), pairs=pairs)
z, zz, _ = dense_trace(spec, one.times, pairs)

print(f"{'t':>4} {'Z1 exact':>9} {'1-site':>8} {'2-site':>8}   {'ZZ exact':>9} {'1-site':>8} {'2-site':>8}")
for i, t in enumerate(one.times):
    print(
        f"{t:4.1f} {z[i, 0]:9.4f} {one.z[i, 0]:8.4f} {two.z[i, 0]:8.4f}   "
        f"{zz[i, 0]:9.4f} {one.zz[i, 0]:8.4f} {two.zz[i, 0]:8.4f}"
    )
print(f"max |dev| one-site {np.max(np.abs(one.z[:, 0] - z[:, 0])):.3e}, two-site {np.max(np.abs(two.z[:, 0] - z[:, 0])):.3e}")
