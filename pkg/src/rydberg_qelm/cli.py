"""Command-line driver: ingest, embed, train, sweep, bench, validate.

Every command reads an optional JSON config, applies flag overrides, echoes
the resolved config into its output directory and writes plain CSV/JSON.
Exit codes: 0 success, 1 validation or tolerance failure, 2 input error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import data as dio
from .embedding import embed_dataset, embedding_pairs, sweep_grid
from .exact import dense_trace
from .hamiltonian import C6_DEFAULT, V_THRESHOLD_DEFAULT, ChainSpec, build_mpo
from .ml import kfold_evaluate, pca_fit, pca_transform, scale_apply, scale_fit, train_mlp, train_softmax
from .mps import product_state
from .tdvp import METHODS, EvolutionConfig, evolve

logger = logging.getLogger("rydberg_qelm")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
TWO_PI = 2 * np.pi


class InputError(Exception):
    pass


DEFAULT_CONFIG: dict = {
    "dataset": {"dir": None, "csv": None, "label_column": "label", "n_train": 2000, "n_test": 500, "seed": 0},
    "encoding": {"k": 10, "scale_low": -6.0, "scale_high": 6.0},
    # omega in multiples of 2*pi rad/us, as on the command line
    "chain": {"omega": 1.0, "spacing_um": 11.0, "phi": 0.0, "C": C6_DEFAULT, "v_threshold": V_THRESHOLD_DEFAULT},
    "evolution": {
        "method": "one-site",
        "dt": 0.5,
        "total_time": 4.0,
        "chi_max": 100,
        "inner_substeps": 1,
        "krylov_dim": 25,
        "krylov_tol": 1e-10,
        "svd_cutoff": 1e-12,
        "full_pairs": False,
    },
    "model": {"head": "linear", "l1": 1e-4, "lr": 1e-3, "epochs": 50, "batch": 128, "k_folds": 5},
    "sweep": {"omegas": [0.5, 1.0, 1.5, 2.0], "distances": [9.0, 10.0, 11.0, 13.0], "n_records": 500},
    "bench": {"qubits": [4, 8, 12, 16, 20], "methods": list(METHODS), "repeats": 1},
    "validate": {"n": 8, "omega": 1.1, "detuning": 1.2, "spacing_um": 11.0, "tolerance": 0.02},
    "output": {"directory": "qelm-out"},
    "seed": 0,
    "workers": None,
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rydberg-qelm experiment config",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": ["string", "null"]},
                "csv": {"type": ["string", "null"]},
                "label_column": {"type": ["string", "integer"]},
                "n_train": {"type": "integer", "minimum": 1},
                "n_test": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer"},
            },
        },
        "encoding": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"k": _posint, "scale_low": _num, "scale_high": _num},
        },
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega": {"type": "number", "minimum": 0},
                "spacing_um": _pos,
                "phi": _num,
                "C": _pos,
                "v_threshold": {"type": "number", "minimum": 0},
            },
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": list(METHODS)},
                "dt": _pos,
                "total_time": _pos,
                "chi_max": _posint,
                "inner_substeps": _posint,
                "krylov_dim": _posint,
                "krylov_tol": _pos,
                "svd_cutoff": {"type": "number", "minimum": 0},
                "full_pairs": {"type": "boolean"},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "head": {"enum": ["linear", "mlp"]},
                "l1": {"type": "number", "minimum": 0},
                "lr": _pos,
                "epochs": {"type": "integer", "minimum": 0},
                "batch": _posint,
                "k_folds": {"type": "integer", "minimum": 2},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omegas": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "distances": {"type": "array", "items": _pos, "minItems": 1},
                "n_records": _posint,
            },
        },
        "bench": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "qubits": {"type": "array", "items": _posint, "minItems": 1},
                "methods": {"type": "array", "items": {"enum": list(METHODS)}, "minItems": 1},
                "repeats": _posint,
            },
        },
        "validate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 2, "maximum": 12},
                "omega": {"type": "number", "minimum": 0},
                "detuning": _num,
                "spacing_um": _pos,
                "tolerance": _pos,
            },
        },
        "output": {"type": "object", "additionalProperties": False, "properties": {"directory": {"type": "string"}}},
        "seed": {"type": "integer"},
        "workers": {"type": ["integer", "null"], "minimum": 1},
    },
}


# -- config handling -------------------------------------------------------------


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then command-line flags."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: invalid JSON ({exc})") from exc
        try:
            jsonschema.validate(user, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise InputError(f"{args.config}: {where}: {exc.message}") from exc
        cfg = _merge(cfg, user)
    flags = {
        ("output", "directory"): args.out,
        ("seed",): args.seed,
        ("workers",): args.workers,
        ("evolution", "method"): args.method,
        ("chain", "omega"): args.omega,
        ("chain", "spacing_um"): args.distance_um,
        ("encoding", "k"): args.qubits,
    }
    for keys, value in flags.items():
        if value is None:
            continue
        node = cfg
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    if args.seed is not None:
        cfg["dataset"]["seed"] = args.seed
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"resolved config: {where}: {exc.message}") from exc
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    return cfg


def _chain_spec(cfg: dict, n: int) -> ChainSpec:
    c = cfg["chain"]
    return ChainSpec(
        n=n, omega=c["omega"] * TWO_PI, spacing_um=c["spacing_um"], phi=c["phi"], C=c["C"], v_threshold=c["v_threshold"]
    )


def _evolution(cfg: dict, method: str | None = None) -> EvolutionConfig:
    e = cfg["evolution"]
    return EvolutionConfig(
        dt=e["dt"],
        total_time=e["total_time"],
        inner_substeps=e["inner_substeps"],
        method=method or e["method"],
        chi_max=e["chi_max"],
        svd_cutoff=e["svd_cutoff"],
        krylov_dim=e["krylov_dim"],
        krylov_tol=e["krylov_tol"],
        record_energy=False,
    )


def _out_dir(cfg: dict, *parts: str) -> Path:
    d = Path(cfg["output"]["directory"]).joinpath(*parts)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def _echo_config(d: Path, cfg: dict) -> None:
    _write_json(d / "resolved_config.json", cfg)


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=_json_default).encode()).hexdigest()


# -- data preparation --------------------------------------------------------------


def load_dataset(cfg: dict) -> dio.ImageDataset:
    ds_cfg = cfg["dataset"]
    try:
        if ds_cfg["csv"]:
            return dio.load_csv_dataset(ds_cfg["csv"], ds_cfg["label_column"])
        directory = Path(ds_cfg["dir"]) if ds_cfg["dir"] else dio.default_data_dir()
        return dio.load_mnist(directory, "train")
    except (FileNotFoundError, dio.IdxFormatError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def prepare_features(cfg: dict) -> tuple[np.ndarray, np.ndarray, dict]:
    """Subset, PCA and [low, high] scaling (both fit on the training part).

    Rows are the training records followed by the test records.
    """
    ds = load_dataset(cfg)
    d, enc = cfg["dataset"], cfg["encoding"]
    try:
        train, test = dio.subset(ds, d["n_train"], d["n_test"], d["seed"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    pca = pca_fit(train.images, enc["k"])
    scaler = scale_fit(pca_transform(pca, train.images), enc["scale_low"], enc["scale_high"])
    x = scale_apply(scaler, pca_transform(pca, np.vstack([train.images, test.images])))
    y = np.concatenate([train.labels, test.labels])
    info = {"source": ds.source, "n_train": len(train), "n_test": len(test)}
    return x, y, info


# -- commands ------------------------------------------------------------------------


def cmd_ingest(cfg: dict, args) -> int:
    ds = load_dataset(cfg)
    files = [v for k, v in ds.source.items() if k in ("images", "labels", "csv")]
    summary = {
        "records": len(ds),
        "features": int(ds.images.shape[1]),
        "classes": {str(int(c)): int(n) for c, n in zip(*np.unique(ds.labels, return_counts=True))},
        "files": {f: dio.sha256_file(f) for f in files},
    }
    test_dir = Path(cfg["dataset"]["dir"]) if cfg["dataset"]["dir"] else dio.default_data_dir()
    if not cfg["dataset"]["csv"]:
        try:
            summary["test_records"] = len(dio.load_mnist(test_dir, "test"))
        except FileNotFoundError:
            summary["test_records"] = 0
    out = _out_dir(cfg)
    _echo_config(out, cfg)
    _write_json(out / "ingest.json", summary)
    print(f"{summary['records']} records x {summary['features']} features", end="")
    if "test_records" in summary:
        print(f", {summary['test_records']} test records", end="")
    print()
    for f, h in summary["files"].items():
        print(f"  {f}  sha256 {h}")
    return EXIT_OK


def _embed_manifest(cfg: dict, x: np.ndarray, y: np.ndarray, method: str) -> dict:
    spec = _chain_spec(cfg, x.shape[1])
    evo = _evolution(cfg, method)
    body = {
        "spec": {k: v for k, v in spec.to_dict().items() if k != "detunings"},
        "evolution_config": evo.to_dict(),
        "method": method,
        "full_pairs": cfg["evolution"]["full_pairs"],
        "dataset_sha256": dio.sha256_arrays(x, y),
    }
    body["config_hash"] = _hash(body)
    return body


def embedding_dir(cfg: dict, method: str | None = None) -> Path:
    return Path(cfg["output"]["directory"]) / "embeddings" / (method or cfg["evolution"]["method"])


def cmd_embed(cfg: dict, args) -> int:
    x, y, info = prepare_features(cfg)
    method = cfg["evolution"]["method"]
    manifest = _embed_manifest(cfg, x, y, method)
    d = embedding_dir(cfg, method)
    old = d / "manifest.json"
    if old.exists() and not args.force:
        with open(old) as fh:
            if json.load(fh).get("config_hash") == manifest["config_hash"]:
                print(f"cache hit: {d}")
                return EXIT_OK
    spec = _chain_spec(cfg, x.shape[1])
    evo = _evolution(cfg, method)
    t0 = time.perf_counter()

    def progress(done, total):
        if args.verbose:
            print(f"  {done}/{total} records", file=sys.stderr)

    emb = embed_dataset(
        x, spec, evo, full_pairs=cfg["evolution"]["full_pairs"], workers=cfg["workers"], progress=progress
    )
    elapsed = time.perf_counter() - t0
    manifest.update(elapsed_s=elapsed, n_train=info["n_train"], n_test=info["n_test"])
    dio.write_embedding_cache(d, emb.values, emb.columns, y, manifest)
    k = x.shape[1]
    dio.write_csv(d / "features.csv", [f"x_{i + 1}" for i in range(k)], x.tolist())
    _write_json(d / "errors.json", {str(i): msg for i, msg in sorted(emb.errors.items())})
    _echo_config(d, cfg)
    print(f"embedded {emb.n_records} records into {len(emb.columns)} columns in {elapsed:.1f} s -> {d}")
    if emb.errors:
        print(f"{len(emb.errors)} records failed; see {d / 'errors.json'}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _read_features(d: Path) -> np.ndarray:
    with open(d / "features.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([[float(v) for v in row] for row in reader])


def _trainer(cfg: dict, seed: int):
    m = cfg["model"]
    kw = dict(l1=m["l1"], epochs=m["epochs"], lr=m["lr"], batch=m["batch"], seed=seed)
    if m["head"] == "mlp":
        return lambda a, b: train_mlp(a, b, **kw)
    return lambda a, b: train_softmax(a, b, **kw)


def cmd_train(cfg: dict, args) -> int:
    d = Path(args.embedding) if args.embedding else embedding_dir(cfg)
    try:
        values, columns, labels, manifest = dio.read_embedding_cache(d)
    except FileNotFoundError as exc:
        raise InputError(f"no embedding cache at {d}; run `embed` first ({exc.filename} missing)") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    expected_spec = {k: v for k, v in _chain_spec(cfg, 1).to_dict().items() if k not in ("detunings", "n")}
    cached_spec = {k: v for k, v in manifest["spec"].items() if k != "n"}
    evo = _evolution(cfg, manifest["method"]).to_dict()
    if not args.embedding and (cached_spec != expected_spec or manifest["evolution_config"] != evo):
        print(f"cache at {d} was built with a different chain or evolution config; rerun `embed`", file=sys.stderr)
        return EXIT_FAIL
    if args.features == "pca":
        x = _read_features(d)
    else:
        x = values
        if args.t_max is not None:
            times = np.array(manifest["evolution_config"]["dt"]) * np.arange(
                1, round(manifest["evolution_config"]["total_time"] / manifest["evolution_config"]["dt"]) + 1
            )
            keep = int(np.sum(times <= args.t_max + 1e-9))
            if keep == 0:
                raise InputError(f"--t-max {args.t_max} keeps no snapshots")
            x = values[:, : keep * (len(columns) // len(times))]
    good = np.all(np.isfinite(x), axis=1)
    res = kfold_evaluate(x[good], labels[good], cfg["model"]["k_folds"], _trainer(cfg, cfg["seed"]), seed=cfg["seed"])
    tag = f"{args.features}-{cfg['model']['head']}" + (f"-t{args.t_max:g}" if args.t_max is not None else "")
    out = _out_dir(cfg, "train", tag)
    dio.write_csv(out / "folds.csv", ["fold", "accuracy"], [[i, float(a)] for i, a in enumerate(res.accuracies)])
    summary = {
        "features": args.features,
        "head": cfg["model"]["head"],
        "t_max": args.t_max,
        "n_records": int(good.sum()),
        "n_columns": int(x.shape[1]),
        "k_folds": cfg["model"]["k_folds"],
        "mean": res.mean,
        "std": res.std,
        "embedding_dir": str(d),
    }
    _write_json(out / "summary.json", summary)
    _echo_config(out, cfg)
    print(f"{tag}: accuracy {res.mean:.4f} +/- {res.std:.4f} over {len(res.accuracies)} folds -> {out}")
    return EXIT_OK


def cmd_sweep(cfg: dict, args) -> int:
    s = cfg["sweep"]
    omegas = args.omegas if args.omegas else s["omegas"]
    distances = args.distances if args.distances else s["distances"]
    x, y, _ = prepare_features(cfg)
    m = min(s["n_records"], len(y))
    x, y = x[:m], y[:m]
    trainer = _trainer(cfg, cfg["seed"])

    def evaluate(v, lab):
        r = kfold_evaluate(v, lab, cfg["model"]["k_folds"], trainer, seed=cfg["seed"])
        return r.mean, r.std

    res = sweep_grid(
        np.asarray(omegas) * TWO_PI,
        distances,
        x,
        _chain_spec(cfg, x.shape[1]),
        _evolution(cfg),
        labels=None if args.no_accuracy else y,
        evaluate=None if args.no_accuracy else evaluate,
        workers=cfg["workers"],
    )
    out = _out_dir(cfg, "sweep")
    header = ["omega", "distance_um", "accuracy", "accuracy_std", "variance", "ea_q", "status"]
    rows = []
    for r in res.rows():
        r["omega"] = r["omega"] / TWO_PI
        rows.append([r[h] for h in header])
    dio.write_csv(out / "heatmap.csv", header, rows)
    _echo_config(out, cfg)
    failed = [r for r in rows if r[-1] != "ok"]
    print(f"{len(rows)} cells -> {out / 'heatmap.csv'}" + (f" ({len(failed)} failed)" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_bench(cfg: dict, args) -> int:
    b = cfg["bench"]
    qubits = args.sizes if args.sizes else b["qubits"]
    rng = np.random.default_rng(cfg["seed"])
    out = _out_dir(cfg, "bench")
    rows = []
    for n in qubits:
        record = rng.uniform(cfg["encoding"]["scale_low"], cfg["encoding"]["scale_high"], size=n)
        spec = _chain_spec(cfg, n)
        for method in b["methods"]:
            evo = _evolution(cfg, method)
            best = np.inf
            for _ in range(b["repeats"]):
                t0 = time.perf_counter()
                embed_dataset(record[None, :], spec, evo, full_pairs=cfg["evolution"]["full_pairs"])
                best = min(best, time.perf_counter() - t0)
            rows.append([n, method, best])
            print(f"n={n:3d} {method:9s} {best:9.3f} s")
    dio.write_csv(out / "bench.csv", ["n", "method", "seconds"], rows)
    _echo_config(out, cfg)
    return EXIT_OK


def cmd_validate(cfg: dict, args) -> int:
    v = cfg["validate"]
    tol = args.tolerance if args.tolerance is not None else v["tolerance"]
    n = v["n"]
    c = cfg["chain"]
    spec = ChainSpec(
        n=n,
        omega=v["omega"] * TWO_PI,
        spacing_um=v["spacing_um"],
        phi=c["phi"],
        detunings=(v["detuning"] * TWO_PI,) * n,
        C=c["C"],
        v_threshold=c["v_threshold"],
    )
    pairs = embedding_pairs(spec)
    h = build_mpo(spec)
    out = _out_dir(cfg, "validate")
    traces = {}
    for method in METHODS:
        evo = EvolutionConfig(**{**_evolution(cfg, method).to_dict(), "record_energy": True})
        tr = evolve(product_state(n), h, evo, pairs=pairs)
        if tr.error:
            print(f"{method} evolution failed: {tr.error}", file=sys.stderr)
            return EXIT_FAIL
        traces[method] = tr
        dio.write_trace_csv(out / f"trace_{method}.csv", tr.times, tr.z, tr.zz, pairs)
        dio.write_diagnostics_csv(out / f"diagnostics_{method}.csv", tr)
    times = traces["one-site"].times
    z_ex, zz_ex, _ = dense_trace(spec, times, pairs)
    dio.write_trace_csv(out / "trace_exact.csv", times, z_ex, zz_ex, pairs)

    watched = [("Z_1", lambda z, zz: z[:, 0])]
    if (0, 1) in pairs:
        k = pairs.index((0, 1))
        watched.append(("Z_1Z_2", lambda z, zz, k=k: zz[:, k]))
    rows = []
    worst = {m: 0.0 for m in METHODS}
    for name, pick in watched:
        ref = pick(z_ex, zz_ex)
        vals = {m: pick(traces[m].z, traces[m].zz) for m in METHODS}
        for i, t in enumerate(times):
            dev = {m: abs(vals[m][i] - ref[i]) for m in METHODS}
            for m in METHODS:
                worst[m] = max(worst[m], dev[m])
            rows.append(
                [float(t), name, float(ref[i]), float(vals["one-site"][i]), float(vals["two-site"][i]),
                 float(dev["one-site"]), float(dev["two-site"])]
            )
    header = ["time_us", "observable", "exact", "one_site", "two_site", "dev_one_site", "dev_two_site"]
    dio.write_csv(out / "deviations.csv", header, rows)
    passed = worst["two-site"] <= tol
    _write_json(
        out / "summary.json",
        {"max_dev_one_site": worst["one-site"], "max_dev_two_site": worst["two-site"], "tolerance": tol, "pass": passed},
    )
    _echo_config(out, cfg)
    print(f"{'observable':>10s} {'t':>5s} {'exact':>10s} {'one-site':>10s} {'two-site':>10s}")
    for r in rows:
        print(f"{r[1]:>10s} {r[0]:5.2f} {r[2]:10.6f} {r[3]:10.6f} {r[4]:10.6f}")
    verdict = "PASS" if passed else "FAIL"
    print(f"max |dev| one-site {worst['one-site']:.3e}, two-site {worst['two-site']:.3e} (tol {tol:g}): {verdict}")
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
    "validate": cmd_validate,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="worker processes (default: host CPU count)")
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--omega", type=float, help="Rabi frequency in units of 2*pi rad/us")
    common.add_argument("--distance-um", type=float, help="atom spacing in micrometres")
    common.add_argument("--qubits", type=int, help="chain length (= number of PCA features)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rydberg-qelm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="load the dataset and print counts and checksums")
    p = sub.add_parser("embed", parents=[common], help="PCA, scale and embed the dataset")
    p.add_argument("--force", action="store_true", help="recompute even when the cache matches")
    p = sub.add_parser("train", parents=[common], help="k-fold training on a cached embedding")
    p.add_argument("--embedding", help="embedding cache directory (default: <out>/embeddings/<method>)")
    p.add_argument("--features", choices=["embedding", "pca"], default="embedding")
    p.add_argument("--head", choices=["linear", "mlp"])
    p.add_argument("--t-max", type=float, help="use only snapshots with t <= T (us)")
    p = sub.add_parser("sweep", parents=[common], help="omega x distance disorder/accuracy grid")
    p.add_argument("--omegas", type=_floats, help="comma-separated, units of 2*pi rad/us")
    p.add_argument("--distances", type=_floats, help="comma-separated micrometres")
    p.add_argument("--no-accuracy", action="store_true", help="only variance and q")
    p = sub.add_parser("bench", parents=[common], help="single-record embedding time per chain length")
    p.add_argument("--sizes", type=_ints, help="comma-separated chain lengths")
    p = sub.add_parser("validate", parents=[common], help="compare both TDVP methods with the dense oracle")
    p.add_argument("--tolerance", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        if getattr(args, "head", None):
            cfg["model"]["head"] = args.head
        return COMMANDS[args.command](cfg, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
