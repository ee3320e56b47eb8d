"""Wall time per record for one-site and two-site TDVP vs qubit count."""

import sys
import time

import numpy as np

from rydberg_qelm.embedding import embed_record
from rydberg_qelm.hamiltonian import ChainSpec
from rydberg_qelm.tdvp import EvolutionConfig

sizes = [int(a) for a in sys.argv[1:]] or [4, 8, 12, 16, 20]
rng = np.random.default_rng(0)
print(f"{'n':>3} {'one-site s':>11} {'two-site s':>11}")
for n in sizes:
    rec = rng.uniform(-6, 6, n)
    row = []
    for method in ("one-site", "two-site"):
        t0 = time.perf_counter()
        embed_record(rec, ChainSpec(n=n, omega=2 * np.pi), EvolutionConfig(method=method, record_energy=False))
        row.append(time.perf_counter() - t0)
    print(f"{n:3d} {row[0]:11.3f} {row[1]:11.3f}", flush=True)
