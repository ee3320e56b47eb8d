"""One-site and two-site TDVP for finite MPS under an MPO Hamiltonian.

Both integrators use the symmetric projector-splitting scheme: a left to
right sweep over half a step followed by a right to left sweep over the
other half. States enter and leave a step with the orthogonality center on
site 0.
"""

from __future__ import annotations

import logging
import math
import time as _time
from dataclasses import asdict, dataclass, field

import numpy as np

from .hamiltonian import MpoOperator
from .mps import MpsState, canonicalize, entanglement_entropy, mark_stale, measure_z_correlators, pad_bond_dimension
from .tensor import (
    DEFAULT_KRYLOV_DIM,
    DEFAULT_KRYLOV_TOL,
    DEFAULT_SVD_CUTOFF,
    krylov_expm_apply,
    truncated_svd,
)

logger = logging.getLogger(__name__)

METHODS = ("one-site", "two-site")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 0.5
    total_time: float = 4.0
    inner_substeps: int = 1
    method: str = "one-site"
    chi_max: int = 100
    svd_cutoff: float = DEFAULT_SVD_CUTOFF
    krylov_dim: int = DEFAULT_KRYLOV_DIM
    krylov_tol: float = DEFAULT_KRYLOV_TOL
    discard_alarm: float = 1e-6
    include_t0: bool = False
    pad_chi: int | None = None
    record_energy: bool = True
    record_entropy: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.total_time <= 0:
            raise ValueError("dt and total_time must be positive")
        ratio = self.total_time / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"total_time {self.total_time} is not a multiple of dt {self.dt}")
        if self.inner_substeps < 1:
            raise ValueError("inner_substeps must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.chi_max < 1:
            raise ValueError("chi_max must be positive")

    @property
    def n_snapshots(self) -> int:
        return int(round(self.total_time / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.n_snapshots + 1)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


# -- effective Hamiltonians -------------------------------------------------
# Environments have axes (bra bond, MPO bond, ket bond).


def _update_left(env, a, w):
    x = np.tensordot(env, a, axes=(2, 0))  # (a, w, t, d)
    x = np.tensordot(x, w, axes=((1, 2), (0, 2)))  # (a, d, s, v)
    return np.tensordot(a.conj(), x, axes=((0, 1), (0, 2)))  # (c, d, v)->reorder


def _left_env(env, a, w):
    return _update_left(env, a, w).transpose(0, 2, 1)


def _right_env(env, b, w):
    x = np.tensordot(b, env, axes=(2, 2))  # (b, t, c, v)
    x = np.tensordot(w, x, axes=((2, 3), (1, 3)))  # (w, s, b, c)
    return np.tensordot(b.conj(), x, axes=((1, 2), (1, 3))).transpose(0, 1, 2)  # (a, w, b)


def _apply_one(left, w, right):
    def apply(m):
        x = np.tensordot(left, m, axes=(2, 0))  # (a, w, t, d)
        x = np.tensordot(x, w, axes=((1, 2), (0, 2)))  # (a, d, s, v)
        return np.tensordot(x, right, axes=((1, 3), (2, 1)))  # (a, s, c)

    return apply


def _apply_two(left, w1, w2, right):
    def apply(theta):
        x = np.tensordot(left, theta, axes=(2, 0))  # (a, w, t1, t2, d)
        x = np.tensordot(x, w1, axes=((1, 2), (0, 2)))  # (a, t2, d, s1, v1)
        x = np.tensordot(x, w2, axes=((4, 1), (0, 2)))  # (a, d, s1, s2, v2)
        return np.tensordot(x, right, axes=((1, 4), (2, 1))).transpose(0, 1, 2, 3)  # (a, s1, s2, c)

    return apply


def _apply_zero(left, right):
    def apply(c):
        x = np.tensordot(left, c, axes=(2, 0))  # (a, w, d)
        return np.tensordot(x, right, axes=((1, 2), (1, 2)))  # (a, c)

    return apply


def mpo_expectation(state: MpsState, h: MpoOperator) -> float:
    """``<psi|H|psi> / <psi|psi>``."""
    env = np.ones((1, 1, 1), dtype=np.complex128)
    nrm = np.ones((1, 1), dtype=np.complex128)
    for a, w in zip(state.tensors, h.tensors):
        env = _left_env(env, a, w)
        tmp = np.tensordot(nrm, a, axes=(1, 0))
        nrm = np.tensordot(a.conj(), tmp, axes=((0, 1), (0, 1)))
    return float(env[0, 0, 0].real / nrm[0, 0].real)


class TdvpEngine:
    """Holds the MPS tensors and MPO environments between steps."""

    def __init__(
        self,
        state: MpsState,
        h: MpoOperator,
        krylov_dim: int = DEFAULT_KRYLOV_DIM,
        krylov_tol: float = DEFAULT_KRYLOV_TOL,
    ):
        if state.n != h.n:
            raise ValueError(f"state has {state.n} sites but the operator has {h.n}")
        if state.center != 0:
            state = canonicalize(state, 0)
        self.ts = list(state.tensors)
        self.ws = list(h.tensors)
        self.n = state.n
        self.krylov_dim = krylov_dim
        self.krylov_tol = krylov_tol
        self.krylov_failures = 0
        self.discarded = 0.0
        self.left: list = [None] * self.n
        self.right: list = [None] * self.n
        trivial = np.ones((1, 1, 1), dtype=np.complex128)
        self.left[0] = trivial
        self.right[self.n - 1] = trivial
        for i in range(self.n - 1, 0, -1):
            self.right[i - 1] = _right_env(self.right[i], self.ts[i], self.ws[i])

    def state(self) -> MpsState:
        return mark_stale(MpsState(tuple(self.ts)), 0)

    def _expm(self, apply, v, prefactor):
        out, ok = krylov_expm_apply(apply, v, prefactor, self.krylov_dim, self.krylov_tol)
        if not ok:
            self.krylov_failures += 1
        return out

    def sweep_one_site(self, dt: float) -> None:
        n, ts, ws, L, R = self.n, self.ts, self.ws, self.left, self.right
        fwd, bwd = -0.5j * dt, 0.5j * dt
        for i in range(n):
            ts[i] = self._expm(_apply_one(L[i], ws[i], R[i]), ts[i], fwd)
            if i < n - 1:
                chi_l, d, chi_r = ts[i].shape
                q, r = np.linalg.qr(ts[i].reshape(chi_l * d, chi_r))
                ts[i] = q.reshape(chi_l, d, q.shape[1])
                L[i + 1] = _left_env(L[i], ts[i], ws[i])
                r = self._expm(_apply_zero(L[i + 1], R[i]), r, bwd)
                ts[i + 1] = np.tensordot(r, ts[i + 1], axes=(1, 0))
        for i in range(n - 1, -1, -1):
            ts[i] = self._expm(_apply_one(L[i], ws[i], R[i]), ts[i], fwd)
            if i > 0:
                chi_l, d, chi_r = ts[i].shape
                q, r = np.linalg.qr(ts[i].reshape(chi_l, d * chi_r).T)
                ts[i] = q.T.reshape(q.shape[1], d, chi_r)
                R[i - 1] = _right_env(R[i], ts[i], ws[i])
                c = self._expm(_apply_zero(L[i], R[i - 1]), r.T, bwd)
                ts[i - 1] = np.tensordot(ts[i - 1], c, axes=(2, 0))

    def sweep_two_site(self, dt: float, chi_max: int, cutoff: float) -> float:
        n, ts, ws, L, R = self.n, self.ts, self.ws, self.left, self.right
        if n == 1:
            self.sweep_one_site(dt)
            return 0.0
        fwd, bwd = -0.5j * dt, 0.5j * dt
        discarded = 0.0
        for i in range(n - 1):
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            theta = self._expm(_apply_two(L[i], ws[i], ws[i + 1], R[i + 1]), theta, fwd)
            res = truncated_svd(theta, 2, chi_max, cutoff)
            discarded += res.discarded_weight
            ts[i] = res.u
            L[i + 1] = _left_env(L[i], ts[i], ws[i])
            m = (res.s / np.linalg.norm(res.s))[:, None, None] * res.vh
            if i < n - 2:
                m = self._expm(_apply_one(L[i + 1], ws[i + 1], R[i + 1]), m, bwd)
            ts[i + 1] = m
        for i in range(n - 2, -1, -1):
            theta = np.tensordot(ts[i], ts[i + 1], axes=(2, 0))
            theta = self._expm(_apply_two(L[i], ws[i], ws[i + 1], R[i + 1]), theta, fwd)
            res = truncated_svd(theta, 2, chi_max, cutoff)
            discarded += res.discarded_weight
            ts[i + 1] = res.vh
            R[i] = _right_env(R[i + 1], ts[i + 1], ws[i + 1])
            m = res.u * (res.s / np.linalg.norm(res.s))
            if i > 0:
                m = self._expm(_apply_one(L[i], ws[i], R[i]), m, bwd)
            ts[i] = m
        self.discarded += discarded
        return discarded

    def center_norm(self) -> float:
        return float(np.linalg.norm(self.ts[0]))

    def energy(self) -> float:
        """Energy from the site-0 environment; valid right after a step."""
        c = self.ts[0]
        hc = _apply_one(self.left[0], self.ws[0], self.right[0])(c)
        return float(np.vdot(c, hc).real / np.vdot(c, c).real)


def tdvp_step_one_site(state: MpsState, h: MpoOperator, dt: float, **krylov) -> tuple[MpsState, bool]:
    """One symmetric one-site step. Returns the new state and a Krylov-convergence flag."""
    eng = TdvpEngine(state, h, **krylov)
    eng.sweep_one_site(dt)
    return eng.state(), eng.krylov_failures == 0


def tdvp_step_two_site(
    state: MpsState,
    h: MpoOperator,
    dt: float,
    chi_max: int = 100,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    **krylov,
) -> tuple[MpsState, float]:
    """One symmetric two-site step. Returns the new state and the discarded weight."""
    eng = TdvpEngine(state, h, **krylov)
    w = eng.sweep_two_site(dt, chi_max, cutoff)
    return eng.state(), w


@dataclass
class EvolutionTrace:
    times: np.ndarray
    pairs: list[tuple[int, int]]
    z: np.ndarray  # (snapshots, n)
    zz: np.ndarray  # (snapshots, len(pairs))
    norm: np.ndarray
    energy: np.ndarray
    max_chi: np.ndarray
    discarded_weight: np.ndarray  # accumulated
    krylov_converged: np.ndarray
    bond_dims: list[list[int]]
    entropy: np.ndarray | None = None  # (snapshots, n - 1)
    states: list[MpsState] | None = None
    error: str | None = None
    alarms: list[str] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    def half_chain_entropy(self) -> np.ndarray:
        """Entropy at the central bond per snapshot (needs ``record_entropy``)."""
        if self.entropy is None:
            raise ValueError("trace was recorded without entropy")
        if self.entropy.shape[1] == 0:
            return np.zeros(self.n_snapshots)
        return self.entropy[:, (self.entropy.shape[1] + 1) // 2 - 1]


def evolve(
    state: MpsState,
    h: MpoOperator,
    cfg: EvolutionConfig,
    pairs: list[tuple[int, int]] | None = None,
    keep_states: bool = False,
) -> EvolutionTrace:
    """Integrate to ``cfg.total_time``, measuring on the ``cfg.dt`` grid.

    ``pairs`` selects the two-point correlators to record (0-based); the
    default is every pair. A failure mid-run returns the snapshots gathered
    so far with ``error`` set.
    """
    start = _time.perf_counter()
    n = state.n
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if cfg.pad_chi and cfg.method == "one-site":
        state = pad_bond_dimension(state, cfg.pad_chi)
    eng = TdvpEngine(state, h, cfg.krylov_dim, cfg.krylov_tol)
    h_step = cfg.dt / cfg.inner_substeps
    rows: dict[str, list] = {k: [] for k in ("t", "z", "zz", "norm", "energy", "chi", "disc", "ok", "bonds", "ent")}
    states = [] if keep_states else None
    alarms: list[str] = []

    def record(t):
        snap = eng.state()
        z, zz = measure_z_correlators(snap, pairs)
        rows["t"].append(t)
        rows["z"].append(z)
        rows["zz"].append(zz)
        rows["norm"].append(eng.center_norm())
        rows["energy"].append(eng.energy() if cfg.record_energy else math.nan)
        rows["chi"].append(max(snap.bond_dims, default=1))
        rows["disc"].append(eng.discarded)
        rows["ok"].append(eng.krylov_failures == 0)
        rows["bonds"].append(snap.bond_dims)
        if cfg.record_entropy:
            rows["ent"].append(entanglement_entropy(canonicalize(snap, 0)) if n > 1 else np.zeros(0))
        if keep_states:
            states.append(snap.copy())

    error = None
    if cfg.include_t0:
        record(0.0)
    try:
        for k in range(1, cfg.n_snapshots + 1):
            for _ in range(cfg.inner_substeps):
                if cfg.method == "one-site":
                    eng.sweep_one_site(h_step)
                else:
                    w = eng.sweep_two_site(h_step, cfg.chi_max, cfg.svd_cutoff)
                    if w > cfg.discard_alarm:
                        alarms.append(f"t={k * cfg.dt:g}: discarded weight {w:.3e} above alarm level")
            record(k * cfg.dt)
    except Exception as exc:  # keep the partial trace
        error = f"{type(exc).__name__}: {exc}"
        logger.warning("evolution stopped early: %s", error)
    if eng.krylov_failures:
        logger.debug("%d Krylov solves hit the subspace limit before converging", eng.krylov_failures)
    return EvolutionTrace(
        times=np.array(rows["t"]),
        pairs=list(pairs),
        z=np.array(rows["z"]).reshape(len(rows["t"]), n),
        zz=np.array(rows["zz"]).reshape(len(rows["t"]), len(pairs)),
        norm=np.array(rows["norm"]),
        energy=np.array(rows["energy"]),
        max_chi=np.array(rows["chi"]),
        discarded_weight=np.array(rows["disc"]),
        krylov_converged=np.array(rows["ok"], dtype=bool),
        bond_dims=rows["bonds"],
        entropy=np.array(rows["ent"]) if cfg.record_entropy else None,
        states=states,
        error=error,
        alarms=alarms,
        elapsed_s=_time.perf_counter() - start,
    )
