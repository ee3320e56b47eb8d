"""Rydberg chain Hamiltonian: parameters, interaction table and MPO.

Units: angular frequencies in rad/us, times in us, distances in um.

    H = sum_j (omega/2)(cos(phi) X_j - sin(phi) Y_j)
        - sum_j (delta_j/2)(1 + Z_j)
        + sum_{(j,k) in table} V_jk n_j n_k,      n = (1 + Z)/2

with ``V_jk = C / (d |j - k|)**6`` and only pairs with ``V_jk >= v_threshold``
retained. Constant terms are kept.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

C6_DEFAULT = 862690.0 * 2.0 * np.pi
V_THRESHOLD_DEFAULT = 1e-4

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.diag([1.0, -1.0]).astype(np.complex128)
_N = np.diag([1.0, 0.0]).astype(np.complex128)


@dataclass(frozen=True)
class ChainSpec:
    n: int
    omega: float
    spacing_um: float = 11.0
    phi: float = 0.0
    detunings: tuple[float, ...] = field(default=())
    C: float = C6_DEFAULT
    v_threshold: float = V_THRESHOLD_DEFAULT

    def __post_init__(self):
        if not self.detunings:
            object.__setattr__(self, "detunings", (0.0,) * self.n)
        else:
            object.__setattr__(self, "detunings", tuple(float(x) for x in self.detunings))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.spacing_um <= 0:
            raise ValueError("spacing_um must be positive")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.v_threshold < 0:
            raise ValueError("v_threshold must be non-negative")
        if len(self.detunings) != self.n:
            raise ValueError(f"expected {self.n} detunings, got {len(self.detunings)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detunings"] = list(self.detunings)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSpec":
        return cls(
            n=int(d["n"]),
            omega=float(d["omega"]),
            spacing_um=float(d.get("spacing_um", 11.0)),
            phi=float(d.get("phi", 0.0)),
            detunings=tuple(d.get("detunings") or ()),
            C=float(d.get("C", C6_DEFAULT)),
            v_threshold=float(d.get("v_threshold", V_THRESHOLD_DEFAULT)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class InteractionTable:
    """Retained pairs ``(j, k, V_jk)`` with ``j < k``, sorted by ``(j, k)``."""

    pairs: tuple[tuple[int, int, float], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def index_pairs(self) -> list[tuple[int, int]]:
        return [(j, k) for j, k, _ in self.pairs]

    @property
    def max_range(self) -> int:
        return max((k - j for j, k, _ in self.pairs), default=0)


def pair_coupling(spec: ChainSpec, separation: int) -> float:
    return spec.C / (spec.spacing_um * separation) ** 6


def build_interactions(spec: ChainSpec) -> InteractionTable:
    pairs = []
    for j in range(spec.n):
        for k in range(j + 1, spec.n):
            v = pair_coupling(spec, k - j)
            if v >= spec.v_threshold:
                pairs.append((j, k, v))
    return InteractionTable(tuple(pairs))


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def onsite_term(spec: ChainSpec, site: int) -> np.ndarray:
    drive = 0.5 * spec.omega * (np.cos(spec.phi) * _X - np.sin(spec.phi) * _Y)
    return drive - 0.5 * spec.detunings[site] * (_I2 + _Z)


@dataclass(frozen=True)
class MpoOperator:
    """Site tensors with axes ``(left, physical out, physical in, right)``."""

    tensors: tuple[np.ndarray, ...]

    def __post_init__(self):
        ts = self.tensors
        if ts[0].shape[0] != 1 or ts[-1].shape[3] != 1:
            raise ValueError("boundary MPO bonds must have extent 1")
        for i in range(len(ts) - 1):
            if ts[i].shape[3] != ts[i + 1].shape[0]:
                raise ValueError(f"MPO bond {i} extents disagree")

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [w.shape[3] for w in self.tensors[:-1]]


def build_mpo(spec: ChainSpec, table: InteractionTable | None = None) -> MpoOperator:
    """Finite-state-machine MPO of the chain Hamiltonian.

    Bond channel 0 means "nothing placed yet", the last channel means
    "term complete", and channel ``a`` in between carries an ``n`` operator
    placed ``a`` sites to the left, waiting for its partner.
    """
    if table is None:
        table = build_interactions(spec)
    couplings = {(j, k): v for j, k, v in table.pairs}
    r = table.max_range
    dim = r + 2
    last = dim - 1
    tensors = []
    for k in range(spec.n):
        w = np.zeros((dim, 2, 2, dim), dtype=np.complex128)
        w[0, :, :, 0] = _I2
        w[last, :, :, last] = _I2
        w[0, :, :, last] = onsite_term(spec, k)
        if r > 0:
            w[0, :, :, 1] = _N
        for a in range(1, r + 1):
            if a < r:
                w[a, :, :, a + 1] = _I2
            v = couplings.get((k - a, k))
            if v is not None:
                w[a, :, :, last] = v * _N
        if k == 0:
            w = w[:1]
        if k == spec.n - 1:
            w = w[..., last:]
        tensors.append(w)
    return MpoOperator(tuple(tensors))


def mpo_to_dense(mpo: MpoOperator) -> np.ndarray:
    """Full matrix of an MPO (site 0 most significant); for small chains only."""
    if mpo.n > 12:
        raise ValueError("refusing to expand an MPO with more than 12 sites")
    acc = mpo.tensors[0][0]  # (out, in, right)
    for w in mpo.tensors[1:]:
        acc = np.tensordot(acc, w, axes=(acc.ndim - 1, 0))
    acc = acc[..., 0]
    n = mpo.n
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return acc.transpose(perm).reshape(2**n, 2**n)


def blockade_radius(spec_or_omega: ChainSpec | float, C: float = C6_DEFAULT) -> float:
    """Distance (um) at which the pair interaction equals the Rabi frequency."""
    if isinstance(spec_or_omega, ChainSpec):
        omega, C = spec_or_omega.omega, spec_or_omega.C
    else:
        omega = float(spec_or_omega)
    if omega <= 0:
        raise ValueError("blockade radius needs a positive Rabi frequency")
    return (C / omega) ** (1.0 / 6.0)


def encode_detunings(spec: ChainSpec, features: Sequence[float]) -> ChainSpec:
    features = np.asarray(features, dtype=float).ravel()
    if features.size != spec.n:
        raise ValueError(f"expected {spec.n} features, got {features.size}")
    return replace(spec, detunings=tuple(features.tolist()))
