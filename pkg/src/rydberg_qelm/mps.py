"""Finite matrix product states for spin-1/2 chains.

Site tensors have axes ``(left bond, physical, right bond)``. Physical index
0 is "up" (``Z = +1``, the Rydberg level), index 1 is "down". The dense
vector of an MPS uses site 0 as the most significant bit, matching
:mod:`rydberg_qelm.exact`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .tensor import as_tensor, truncated_svd

UP = np.array([1.0, 0.0], dtype=np.complex128)
DOWN = np.array([0.0, 1.0], dtype=np.complex128)

PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


@dataclass(frozen=True)
class MpsState:
    """An MPS with optional canonical-form bookkeeping.

    ``center`` is the orthogonality center when the tensors left of it are
    left isometries and those right of it are right isometries, else None.
    ``singular_values[b]`` holds the Schmidt values across bond ``b``
    (between sites ``b`` and ``b + 1``) and is None once the tensors have
    been changed without recomputing them.
    """

    tensors: tuple[np.ndarray, ...]
    center: int | None = None
    singular_values: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        ts = self.tensors
        if len(ts) == 0:
            raise ValueError("an MPS needs at least one site")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have extent 1")
        for i, t in enumerate(ts):
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError(f"site {i} tensor has shape {t.shape}, expected (chi_l, 2, chi_r)")
            if i + 1 < len(ts) and t.shape[2] != ts[i + 1].shape[0]:
                raise ValueError(f"bond {i} extents disagree: {t.shape[2]} vs {ts[i + 1].shape[0]}")

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MpsState":
        sv = None if self.singular_values is None else tuple(s.copy() for s in self.singular_values)
        return MpsState(tuple(t.copy() for t in self.tensors), self.center, sv)


def product_state(n: int, local_state: Sequence | np.ndarray = UP) -> MpsState:
    """Bond-dimension-1 MPS from one 2-vector (shared) or an ``(n, 2)`` array."""
    if n < 1:
        raise ValueError("n must be at least 1")
    vecs = np.asarray(local_state, dtype=np.complex128)
    if vecs.ndim == 1:
        vecs = np.tile(vecs, (n, 1))
    if vecs.shape != (n, 2):
        raise ValueError(f"expected one 2-vector or an ({n}, 2) array, got shape {vecs.shape}")
    tensors = []
    for i, v in enumerate(vecs):
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise ValueError(f"local state at site {i} is zero")
        tensors.append((v / nrm).reshape(1, 2, 1).copy())
    sv = tuple(np.ones(1) for _ in range(n - 1))
    return MpsState(tuple(tensors), 0, sv)


def random_mps(n: int, chi: int, rng: np.random.Generator) -> MpsState:
    """Random normalized MPS with bond dimensions capped at ``chi``."""
    dims = [1] + [min(chi, 2 ** min(b, n - b)) for b in range(1, n)] + [1]
    tensors = []
    for i in range(n):
        shape = (dims[i], 2, dims[i + 1])
        tensors.append(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return canonicalize(MpsState(tuple(tensors)), 0)


def from_dense(psi: np.ndarray, chi_max: int = 2**30) -> MpsState:
    """Exact (or chi-truncated) MPS of a dense ``2**n`` vector."""
    psi = as_tensor(psi).reshape(-1)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise ValueError("state length is not a power of two")
    tensors = []
    rest = psi.reshape(1, -1)
    for _ in range(n - 1):
        chi_l = rest.shape[0]
        res = truncated_svd(rest.reshape(chi_l, 2, -1), 2, chi_max, 0.0)
        tensors.append(res.u)
        rest = res.s[:, None] * res.vh.reshape(res.rank, -1)
    tensors.append(rest.reshape(rest.shape[0], 2, 1))
    return canonicalize(MpsState(tuple(tensors)), 0)


def to_dense(state: MpsState) -> np.ndarray:
    """Full state vector; site 0 is the most significant bit."""
    if state.n > 20:
        raise ValueError("refusing to expand an MPS with more than 20 sites")
    out = state.tensors[0].reshape(2, -1)
    for t in state.tensors[1:]:
        out = (out @ t.reshape(t.shape[0], -1)).reshape(-1, t.shape[2])
    return out.reshape(-1)


def norm(state: MpsState) -> float:
    if state.center is not None:
        return float(np.linalg.norm(state.tensors[state.center]))
    return float(np.sqrt(abs(_site_expectation(state, {}))))


def canonicalize(state: MpsState, center: int) -> MpsState:
    """Normalized mixed-canonical form around ``center``.

    Also recomputes the Schmidt values of every bond.
    """
    n = state.n
    if not 0 <= center < n:
        raise IndexError(f"center {center} out of range for {n} sites")
    ts = [as_tensor(t) for t in state.tensors]
    # left-canonical sweep
    for i in range(n - 1):
        chi_l, d, chi_r = ts[i].shape
        q, r = np.linalg.qr(ts[i].reshape(chi_l * d, chi_r))
        ts[i] = q.reshape(chi_l, d, q.shape[1])
        ts[i + 1] = np.tensordot(r, ts[i + 1], axes=(1, 0))
    nrm = np.linalg.norm(ts[-1])
    if nrm == 0.0:
        raise ValueError("cannot canonicalize a zero state")
    ts[-1] = ts[-1] / nrm
    # right-canonical sweep recording Schmidt values
    svals: list[np.ndarray] = [np.ones(1)] * (n - 1)
    for i in range(n - 1, 0, -1):
        res = truncated_svd(ts[i], 1, chi_max=2**30, cutoff=0.0)
        ts[i] = res.vh
        ts[i - 1] = np.tensordot(ts[i - 1], res.u * res.s, axes=(2, 0))
        svals[i - 1] = res.s / np.linalg.norm(res.s)
    for i in range(center):
        chi_l, d, chi_r = ts[i].shape
        q, r = np.linalg.qr(ts[i].reshape(chi_l * d, chi_r))
        ts[i] = q.reshape(chi_l, d, q.shape[1])
        ts[i + 1] = np.tensordot(r, ts[i + 1], axes=(1, 0))
    return MpsState(tuple(ts), center, tuple(svals))


def _check_site(state: MpsState, site: int) -> None:
    if not 0 <= site < state.n:
        raise IndexError(f"site {site} out of range for {state.n} sites")


def _transfer(env: np.ndarray, t: np.ndarray, op: np.ndarray | None = None) -> np.ndarray:
    """Push a left environment ``(bra bond, ket bond)`` through one site."""
    tmp = np.tensordot(env, t, axes=(1, 0))
    if op is not None:
        tmp = np.tensordot(op, tmp, axes=(1, 1)).transpose(1, 0, 2)
    return np.tensordot(t.conj(), tmp, axes=((0, 1), (0, 1)))


def _transfer_right(env: np.ndarray, t: np.ndarray) -> np.ndarray:
    tmp = np.tensordot(t, env, axes=(2, 1))
    return np.tensordot(t.conj(), tmp, axes=((1, 2), (1, 2)))


def _site_expectation(state: MpsState, ops: dict[int, np.ndarray]) -> complex:
    env = np.ones((1, 1), dtype=np.complex128)
    for i, t in enumerate(state.tensors):
        env = _transfer(env, t, ops.get(i))
    return env[0, 0]


def expect_z(state: MpsState, site: int) -> float:
    _check_site(state, site)
    num = _site_expectation(state, {site: PAULI_Z})
    return float(num.real / _site_expectation(state, {}).real)


def expect_zz(state: MpsState, i: int, j: int) -> float:
    _check_site(state, i)
    _check_site(state, j)
    if i == j:
        raise ValueError("expect_zz needs two distinct sites")
    if i > j:
        raise ValueError("expect_zz expects i < j")
    num = _site_expectation(state, {i: PAULI_Z, j: PAULI_Z})
    return float(num.real / _site_expectation(state, {}).real)


def expect_local(state: MpsState, site: int, op: np.ndarray) -> complex:
    _check_site(state, site)
    return _site_expectation(state, {site: as_tensor(op)}) / _site_expectation(state, {}).real


def measure_z_correlators(state: MpsState, pairs: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """All ``<Z_i>`` and ``<Z_i Z_j>`` for the listed pairs (0-based, i < j).

    Uses shared left/right environments, so the cost is linear in ``n``
    plus one transfer per site between each pair.
    """
    n = state.n
    ts = state.tensors
    left = [np.ones((1, 1), dtype=np.complex128)]
    for t in ts:
        left.append(_transfer(left[-1], t))
    right = [np.ones((1, 1), dtype=np.complex128)] * (n + 1)
    for i in range(n - 1, -1, -1):
        right[i] = _transfer_right(right[i + 1], ts[i])
    nrm2 = left[n][0, 0].real
    z = np.empty(n)
    with_z = []
    for i, t in enumerate(ts):
        e = _transfer(left[i], t, PAULI_Z)
        with_z.append(e)
        z[i] = np.sum(e * right[i + 1]).real / nrm2
    by_start: dict[int, list[tuple[int, int]]] = {}
    for idx, (i, j) in enumerate(pairs):
        if not 0 <= i < j < n:
            raise ValueError(f"invalid pair ({i}, {j})")
        by_start.setdefault(i, []).append((j, idx))
    zz = np.empty(len(pairs))
    for i, targets in by_start.items():
        targets.sort()
        env = with_z[i]
        pos = i + 1
        for j, idx in targets:
            while pos < j:
                env = _transfer(env, ts[pos])
                pos += 1
            zz[idx] = np.sum(_transfer(env, ts[j], PAULI_Z) * right[j + 1]).real / nrm2
    return z, zz


def entanglement_entropy(state: MpsState) -> np.ndarray:
    """Von Neumann entropy (natural log) of every bond, length ``n - 1``."""
    if state.singular_values is None:
        raise ValueError("singular values are stale; canonicalize the state first")
    out = np.zeros(state.n - 1)
    for b, s in enumerate(state.singular_values):
        p = np.abs(s) ** 2
        p = p[p > 0]
        p = p / p.sum()
        out[b] = float(-np.sum(p * np.log(p)))
    return np.maximum(out, 0.0)


def half_chain_entropy(state: MpsState) -> float:
    if state.n < 2:
        return 0.0
    return float(entanglement_entropy(state)[state.n // 2 - 1])


def mark_stale(state: MpsState, center: int | None) -> MpsState:
    return replace(state, center=center, singular_values=None)


def dumps(state: MpsState) -> str:
    """JSON text holding shapes and complex data (repr-exact floats)."""
    payload = {
        "center": state.center,
        "tensors": [
            {"shape": list(t.shape), "real": t.real.ravel().tolist(), "imag": t.imag.ravel().tolist()}
            for t in state.tensors
        ],
    }
    return json.dumps(payload)


def loads(text: str) -> MpsState:
    payload = json.loads(text)
    tensors = []
    for entry in payload["tensors"]:
        data = np.array(entry["real"]) + 1j * np.array(entry["imag"])
        tensors.append(data.reshape(entry["shape"]))
    state = MpsState(tuple(tensors), payload["center"])
    return state


def pad_bond_dimension(state: MpsState, chi: int) -> MpsState:
    """Grow every bond towards ``chi`` with zero-weight directions.

    The physical state is unchanged. Used to let one-site TDVP explore a
    larger manifold than the product-state start allows.
    """
    n = state.n
    target = [1] + [min(chi, 2 ** min(b, n - b)) for b in range(1, n)] + [1]
    ts = list(canonicalize(state, n - 1).tensors)
    for i in range(n - 1):
        chi_l, d, chi_r = ts[i].shape
        new_r = max(chi_r, target[i + 1])
        if new_r == chi_r:
            continue
        q = ts[i].reshape(chi_l * d, chi_r)
        # complete the isometry with orthonormal directions
        full, _ = np.linalg.qr(np.hstack([q, np.eye(chi_l * d, dtype=np.complex128)]))
        extra = full[:, chi_r:new_r]
        ts[i] = np.hstack([q, extra]).reshape(chi_l, d, new_r)
        nxt = ts[i + 1]
        pad = np.zeros((new_r - chi_r,) + nxt.shape[1:], dtype=np.complex128)
        ts[i + 1] = np.concatenate([nxt, pad], axis=0)
    # move the center back to site 0 with LQ steps (no truncation)
    for i in range(n - 1, 0, -1):
        chi_l, d, chi_r = ts[i].shape
        q, r = np.linalg.qr(ts[i].reshape(chi_l, d * chi_r).T)
        ts[i] = q.T.reshape(q.shape[1], d, chi_r)
        ts[i - 1] = np.tensordot(ts[i - 1], r.T, axes=(2, 0))
    return MpsState(tuple(ts), 0, None)
