"""Dense statevector reference for small chains (n <= 12).

Basis ordering: site 0 is the most significant bit and bit value 0 is "up"
(``Z = +1``). This is the same mapping :func:`rydberg_qelm.mps.to_dense`
uses.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.linalg

from .hamiltonian import ChainSpec, InteractionTable, build_interactions

MAX_SITES = 12

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _guard(n: int) -> None:
    if n > MAX_SITES:
        raise ValueError(f"dense oracle limited to {MAX_SITES} sites, got {n}")


def pauli_string(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product with ``ops[i]`` on site ``i`` and identity elsewhere."""
    _guard(n)
    return reduce(np.kron, [ops.get(i, I2) for i in range(n)])


def dense_hamiltonian(spec: ChainSpec, table: InteractionTable | None = None) -> np.ndarray:
    """Sum of Pauli strings, constants included."""
    n = spec.n
    _guard(n)
    if table is None:
        table = build_interactions(spec)
    dim = 2**n
    eye = np.eye(dim, dtype=np.complex128)
    h = np.zeros((dim, dim), dtype=np.complex128)
    c, s = np.cos(spec.phi), np.sin(spec.phi)
    for j in range(n):
        h += 0.5 * spec.omega * (c * pauli_string(n, {j: X}) - s * pauli_string(n, {j: Y}))
        h -= 0.5 * spec.detunings[j] * (eye + pauli_string(n, {j: Z}))
    for j, k, v in table.pairs:
        h += 0.25 * v * (eye + pauli_string(n, {j: Z}) + pauli_string(n, {k: Z}) + pauli_string(n, {j: Z, k: Z}))
    return h


def basis_state(n: int, bits: list[int] | None = None) -> np.ndarray:
    """Computational basis vector; ``bits`` default to all up (0)."""
    _guard(n)
    bits = bits or [0] * n
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[idx] = 1.0
    return psi


def dense_evolve(psi: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t) psi`` through a full eigendecomposition."""
    _guard(int(np.log2(len(psi))))
    evals, evecs = np.linalg.eigh(h)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi))


def dense_evolve_expm(psi: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """Same propagation through a Pade matrix exponential (second route)."""
    return scipy.linalg.expm(-1j * t * h) @ psi


def z_diagonals(n: int) -> np.ndarray:
    """``(n, 2**n)`` array of Z eigenvalues per site on each basis state."""
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def dense_observables(psi: np.ndarray) -> dict:
    """``z`` (n,), ``zz`` (n, n) symmetric with unit diagonal, half-chain entropy."""
    n = int(round(np.log2(len(psi))))
    _guard(n)
    p = np.abs(psi) ** 2
    p = p / p.sum()
    zd = z_diagonals(n)
    z = zd @ p
    zz = (zd * p) @ zd.T
    return {"z": z, "zz": zz, "entropy": half_chain_entropy(psi)}


def bipartite_entropy(psi: np.ndarray, cut: int) -> float:
    """Entropy (natural log) between sites ``[0, cut)`` and the rest."""
    n = int(round(np.log2(len(psi))))
    m = psi.reshape(2**cut, 2 ** (n - cut))
    rho = m @ m.conj().T
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    w = w / w.sum()
    return float(-np.sum(w * np.log(w)))


def half_chain_entropy(psi: np.ndarray) -> float:
    n = int(round(np.log2(len(psi))))
    if n < 2:
        return 0.0
    return bipartite_entropy(psi, n // 2)


def dense_trace(spec: ChainSpec, times: np.ndarray, pairs: list[tuple[int, int]], psi0: np.ndarray | None = None):
    """``<Z_i>`` and ``<Z_i Z_j>`` (listed pairs) at every requested time."""
    h = dense_hamiltonian(spec)
    psi0 = basis_state(spec.n) if psi0 is None else psi0
    evals, evecs = np.linalg.eigh(h)
    coeff = evecs.conj().T @ psi0
    z_out, zz_out, ent = [], [], []
    for t in times:
        psi = evecs @ (np.exp(-1j * evals * t) * coeff)
        obs = dense_observables(psi)
        z_out.append(obs["z"])
        zz_out.append([obs["zz"][i, j] for i, j in pairs])
        ent.append(obs["entropy"])
    return np.array(z_out), np.array(zz_out).reshape(len(times), len(pairs)), np.array(ent)
