"""Quantum embeddings from Rydberg-chain dynamics, plus disorder metrics.

Each record's features become the site detunings of a chain that starts in
the all-up state. After every snapshot interval the single-site ``<Z_i>``
and two-point ``<Z_i Z_j>`` values are collected; the concatenation over
snapshots is the record's embedding.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .hamiltonian import ChainSpec, all_pairs, build_interactions, build_mpo, encode_detunings
from .mps import UP, MpsState, product_state
from .tdvp import EvolutionConfig, EvolutionTrace, evolve

logger = logging.getLogger(__name__)


def _fmt_time(t: float) -> str:
    return f"{t:g}"


def embedding_pairs(spec: ChainSpec, full_pairs: bool = False) -> list[tuple[int, int]]:
    """Pairs whose ``<Z_i Z_j>`` enter the embedding (0-based)."""
    if full_pairs:
        return all_pairs(spec.n)
    return build_interactions(spec).index_pairs


def column_names(n: int, pairs: Sequence[tuple[int, int]], times: Sequence[float]) -> list[str]:
    names = []
    for t in times:
        tag = _fmt_time(t)
        names.extend(f"t={tag}:Z_{i + 1}" for i in range(n))
        names.extend(f"t={tag}:Z_{i + 1}Z_{j + 1}" for i, j in pairs)
    return names


def spec_hash(spec: ChainSpec) -> str:
    """Hash of the chain template (detunings excluded)."""
    d = spec.to_dict()
    d.pop("detunings")
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class EmbeddingMatrix:
    values: np.ndarray  # (records, columns)
    columns: list[str]
    n_sites: int
    times: np.ndarray
    pairs: list[tuple[int, int]]
    metadata: dict = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def n_records(self) -> int:
        return self.values.shape[0]

    @property
    def per_snapshot(self) -> int:
        return self.n_sites + len(self.pairs)

    def z_column_indices(self) -> np.ndarray:
        idx = [s * self.per_snapshot + i for s in range(len(self.times)) for i in range(self.n_sites)]
        return np.array(idx, dtype=int)

    def z_traces(self) -> np.ndarray:
        """``(records, snapshots, n)`` array of single-site values."""
        return self.values[:, self.z_column_indices()].reshape(self.n_records, len(self.times), self.n_sites)

    def up_to(self, t_max: float) -> "EmbeddingMatrix":
        """Columns from snapshots with ``t <= t_max`` only."""
        keep = int(np.sum(self.times <= t_max + 1e-9))
        if keep == 0:
            raise ValueError(f"no snapshots at or before t={t_max}")
        cols = keep * self.per_snapshot
        return replace(self, values=self.values[:, :cols], columns=self.columns[:cols], times=self.times[:keep])


def trace_to_vector(trace: EvolutionTrace) -> np.ndarray:
    return np.concatenate([trace.z, trace.zz], axis=1).reshape(-1)


def embed_record_trace(
    features: Sequence[float],
    spec: ChainSpec,
    cfg: EvolutionConfig,
    full_pairs: bool = False,
    initial_state: MpsState | None = None,
) -> EvolutionTrace:
    encoded = encode_detunings(spec, features)
    table = build_interactions(encoded)
    pairs = all_pairs(spec.n) if full_pairs else table.index_pairs
    state = initial_state if initial_state is not None else product_state(spec.n, UP)
    return evolve(state, build_mpo(encoded, table), cfg, pairs=pairs)


def embed_record(
    features: Sequence[float],
    spec: ChainSpec,
    cfg: EvolutionConfig,
    full_pairs: bool = False,
    initial_state: MpsState | None = None,
) -> np.ndarray:
    """Embedding vector of one (already scaled) record."""
    trace = embed_record_trace(features, spec, cfg, full_pairs, initial_state)
    if trace.error:
        raise RuntimeError(trace.error)
    return trace_to_vector(trace)


def _embed_chunk(args):
    rows, start, spec, cfg, full_pairs = args
    out, errors, unconverged = [], {}, 0
    for k, row in enumerate(rows):
        try:
            trace = embed_record_trace(row, spec, cfg, full_pairs)
            if trace.error:
                raise RuntimeError(trace.error)
            unconverged += int(not trace.krylov_converged.all())
            out.append(trace_to_vector(trace))
        except Exception as exc:
            errors[start + k] = f"{type(exc).__name__}: {exc}"
            out.append(None)
    return start, out, errors, unconverged


def embed_dataset(
    records: np.ndarray,
    spec: ChainSpec,
    cfg: EvolutionConfig,
    full_pairs: bool = False,
    workers: int = 1,
    chunk_size: int = 32,
    progress: Callable[[int, int], None] | None = None,
) -> EmbeddingMatrix:
    """Embed every row of ``records``; rows that fail are NaN and listed in ``errors``."""
    records = np.asarray(records, dtype=float)
    if records.ndim != 2 or records.shape[1] != spec.n:
        raise ValueError(f"records must have shape (m, {spec.n}), got {records.shape}")
    pairs = embedding_pairs(spec, full_pairs)
    columns = column_names(spec.n, pairs, cfg.times)
    values = np.full((records.shape[0], len(columns)), np.nan)
    errors: dict[int, str] = {}
    chunks = [
        (records[s : s + chunk_size], s, spec, cfg, full_pairs) for s in range(0, records.shape[0], chunk_size)
    ]
    done = 0
    unconverged = 0

    def collect(result):
        nonlocal done, unconverged
        start, rows, errs, bad = result
        unconverged += bad
        for k, row in enumerate(rows):
            if row is not None:
                values[start + k] = row
        errors.update(errs)
        done += len(rows)
        if progress:
            progress(done, records.shape[0])

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_embed_chunk, chunks):
                collect(result)
    else:
        for chunk in chunks:
            collect(_embed_chunk(chunk))
    if errors:
        logger.warning("%d of %d records failed to embed", len(errors), records.shape[0])
    if unconverged:
        logger.warning(
            "%d of %d records had Krylov solves stop at the subspace limit (krylov_dim=%d)",
            unconverged,
            records.shape[0],
            cfg.krylov_dim,
        )
    metadata = {
        "spec": {k: v for k, v in spec.to_dict().items() if k != "detunings"},
        "spec_hash": spec_hash(spec),
        "evolution_config": cfg.to_dict(),
        "method": cfg.method,
        "full_pairs": full_pairs,
        "krylov_unconverged_records": unconverged,
    }
    return EmbeddingMatrix(values, columns, spec.n, cfg.times, pairs, metadata, errors)


# -- disorder and concentration ---------------------------------------------


def disorder_variance(z_trace: np.ndarray) -> float:
    """Site variance of ``<Z_i(t)>`` summed over snapshots; ``z_trace`` is (snapshots, n)."""
    z = np.asarray(z_trace, dtype=float)
    return float(np.sum(np.var(z, axis=1)))


def edwards_anderson(z_trace: np.ndarray) -> float:
    """Site mean of ``<Z_i(t)>**2`` summed over snapshots."""
    z = np.asarray(z_trace, dtype=float)
    return float(np.sum(np.mean(z**2, axis=1)))


def concentration_metric(emb: EmbeddingMatrix, all_columns: bool = False) -> float:
    """Mean over columns of the across-record (population) variance."""
    if emb.n_records < 2:
        raise ValueError("concentration needs at least two records")
    vals = emb.values if all_columns else emb.values[:, emb.z_column_indices()]
    return float(np.mean(np.var(vals, axis=0)))


@dataclass
class SweepResult:
    omegas: np.ndarray
    distances: np.ndarray
    accuracy: np.ndarray  # (len(omegas), len(distances)), NaN when not computed
    accuracy_std: np.ndarray
    variance: np.ndarray
    ea_q: np.ndarray
    status: np.ndarray  # object array of "ok" or an error message

    def rows(self) -> list[dict]:
        out = []
        for a, om in enumerate(self.omegas):
            for b, d in enumerate(self.distances):
                out.append(
                    {
                        "omega": float(om),
                        "distance_um": float(d),
                        "accuracy": float(self.accuracy[a, b]),
                        "accuracy_std": float(self.accuracy_std[a, b]),
                        "variance": float(self.variance[a, b]),
                        "ea_q": float(self.ea_q[a, b]),
                        "status": str(self.status[a, b]),
                    }
                )
        return out


def sweep_grid(
    omegas: Sequence[float],
    distances: Sequence[float],
    records: np.ndarray,
    spec: ChainSpec,
    cfg: EvolutionConfig,
    labels: np.ndarray | None = None,
    evaluate: Callable[[np.ndarray, np.ndarray], tuple[float, float]] | None = None,
    workers: int = 1,
) -> SweepResult:
    """Disorder metrics (and optionally accuracy) over an omega x distance grid.

    Variance and ``q`` are averaged over the records. When ``labels`` and
    ``evaluate`` are given, ``evaluate(embedding_values, labels)`` must
    return ``(mean accuracy, std)`` for the cell.
    """
    omegas = np.asarray(omegas, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if omegas.size == 0 or distances.size == 0:
        raise ValueError("sweep grid needs at least one omega and one distance")
    shape = (omegas.size, distances.size)
    acc = np.full(shape, np.nan)
    acc_std = np.full(shape, np.nan)
    var = np.full(shape, np.nan)
    q = np.full(shape, np.nan)
    status = np.full(shape, "ok", dtype=object)
    for a, om in enumerate(omegas):
        for b, d in enumerate(distances):
            try:
                cell = replace(spec, omega=float(om), spacing_um=float(d))
                emb = embed_dataset(records, cell, cfg, workers=workers)
                good = np.all(np.isfinite(emb.values), axis=1)
                traces = emb.z_traces()[good]
                var[a, b] = np.mean([disorder_variance(t) for t in traces])
                q[a, b] = np.mean([edwards_anderson(t) for t in traces])
                if emb.errors:
                    status[a, b] = f"{len(emb.errors)} records failed"
                if labels is not None and evaluate is not None:
                    acc[a, b], acc_std[a, b] = evaluate(emb.values[good], np.asarray(labels)[good])
            except Exception as exc:
                status[a, b] = f"{type(exc).__name__}: {exc}"
                logger.warning("sweep cell omega=%g d=%g failed: %s", om, d, exc)
    return SweepResult(omegas, distances, acc, acc_std, var, q, status)
