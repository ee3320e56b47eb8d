"""Dataset ingestion (IDX / CSV) and the on-disk embedding cache."""

from __future__ import annotations

import csv
import datetime as _dt
import gzip
import hashlib
import importlib.util
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


class IdxFormatError(ValueError):
    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: byte offset {offset}: {message}")
        self.path = path
        self.offset = offset


@dataclass
class ImageDataset:
    images: np.ndarray  # (records, pixels) in [0, 1]
    labels: np.ndarray  # (records,) int
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.labels)


def _read_bytes(path) -> bytes:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def read_idx(path) -> np.ndarray:
    """Parse an unsigned-byte IDX file into an array of its stated shape."""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise IdxFormatError(path, 0, f"file too short for the magic number ({len(raw)} bytes)")
    zero, dtype_code, ndim = raw[0:2], raw[2], raw[3]
    if zero != b"\x00\x00" or dtype_code != 0x08:
        magic = struct.unpack(">I", raw[:4])[0]
        raise IdxFormatError(path, 0, f"bad magic 0x{magic:08x}; only unsigned-byte IDX is supported")
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise IdxFormatError(path, 4, f"header declares {ndim} dimensions but the file ends at byte {len(raw)}")
    dims = struct.unpack(">" + "I" * ndim, raw[4:header_end])
    expected = int(np.prod(dims)) if ndim else 1
    payload = len(raw) - header_end
    if payload != expected:
        raise IdxFormatError(
            path, header_end, f"dimensions {dims} need {expected} payload bytes but {payload} are present"
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=header_end).reshape(dims)


def read_idx_images(path) -> np.ndarray:
    arr = read_idx(path)
    magic = 0x0800 | arr.ndim
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(path, 0, f"expected an image file (magic 0x{IMAGE_MAGIC:08x}), got 0x{magic:08x}")
    return arr.reshape(arr.shape[0], -1).astype(np.float64) / 255.0


def read_idx_labels(path) -> np.ndarray:
    arr = read_idx(path)
    if arr.ndim != 1:
        raise IdxFormatError(path, 0, f"expected a label file (magic 0x{LABEL_MAGIC:08x}), got {arr.ndim} dims")
    return arr.astype(np.int64)


def write_idx(path, array: np.ndarray) -> None:
    """Write a uint8 array as IDX; gzip when the name ends in ``.gz``."""
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">BBBB", 0, 0, 0x08, arr.ndim) + struct.pack(">" + "I" * arr.ndim, *arr.shape)
    blob = header + arr.tobytes()
    path = Path(path)
    if path.suffix == ".gz":
        with open(path, "wb") as raw, gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as fh:
            fh.write(blob)
    else:
        path.write_bytes(blob)


def _find(directory: Path, stem: str) -> Path | None:
    for name in (stem, stem + ".gz"):
        p = directory / name
        if p.exists():
            return p
    return None


def load_idx_pair(images_path, labels_path) -> ImageDataset:
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise ValueError(f"{images_path} holds {len(images)} images but {labels_path} holds {len(labels)} labels")
    return ImageDataset(images, labels, {"images": str(images_path), "labels": str(labels_path)})


def load_mnist(directory, split: str = "train") -> ImageDataset:
    directory = Path(directory)
    img = _find(directory, MNIST_FILES[f"{split}_images"])
    lab = _find(directory, MNIST_FILES[f"{split}_labels"])
    if img is None or lab is None:
        missing = MNIST_FILES[f"{split}_images"] if img is None else MNIST_FILES[f"{split}_labels"]
        raise FileNotFoundError(f"{directory / missing}[.gz] not found")
    return load_idx_pair(img, lab)


def load_csv_dataset(path, label_column: str | int = -1) -> ImageDataset:
    """Numeric CSV with a header row; one column holds integer labels."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float)
    if isinstance(label_column, str):
        label_column = header.index(label_column)
    labels = data[:, label_column].astype(np.int64)
    feats = np.delete(data, label_column, axis=1)
    return ImageDataset(feats, labels, {"csv": str(path), "columns": header})


def subset(ds: ImageDataset, n_train: int, n_test: int, seed: int) -> tuple[ImageDataset, ImageDataset]:
    """Disjoint uniform samples without replacement.

    The records are permuted with ``numpy.random.default_rng(seed)``; the
    first ``n_train`` of the permutation form the training set and the next
    ``n_test`` the test set.
    """
    if n_train < 0 or n_test < 0 or n_train + n_test > len(ds):
        raise ValueError(f"cannot draw {n_train} + {n_test} records from {len(ds)}")
    perm = np.random.default_rng(seed).permutation(len(ds))
    tr, te = perm[:n_train], perm[n_train : n_train + n_test]
    src = dict(ds.source, seed=seed)
    return (
        ImageDataset(ds.images[tr], ds.labels[tr], dict(src, indices="train")),
        ImageDataset(ds.images[te], ds.labels[te], dict(src, indices="test")),
    )


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def sha256_arrays(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


# -- MNIST sample bundled with mlxtend ----------------------------------------


def bundled_mnist_csv() -> Path | None:
    spec = importlib.util.find_spec("mlxtend")
    if spec is None or not spec.submodule_search_locations:
        return None
    p = Path(list(spec.submodule_search_locations)[0]) / "data" / "data" / "mnist_5k.csv.gz"
    return p if p.exists() else None


def write_bundled_mnist(out_dir) -> Path:
    """Write mlxtend's 5,000-image MNIST sample as ``train-*`` IDX files."""
    src = bundled_mnist_csv()
    if src is None:
        raise FileNotFoundError("mlxtend's mnist_5k.csv.gz is not available; pip install mlxtend")
    with gzip.open(src, "rt") as fh:
        arr = np.loadtxt(fh, delimiter=",", dtype=np.int64)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / (MNIST_FILES["train_images"] + ".gz"), arr[:, :-1].reshape(-1, 28, 28))
    write_idx(out / (MNIST_FILES["train_labels"] + ".gz"), arr[:, -1])
    return out


def default_data_dir() -> Path:
    env = os.environ.get("QELM_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data" / "mnist"


# -- embedding cache -----------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_embedding_cache(directory, values: np.ndarray, columns: list[str], labels: np.ndarray, manifest: dict) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_csv(d / "embeddings.csv", columns, values.tolist())
    write_csv(d / "labels.csv", ["label"], [[int(v)] for v in labels])
    manifest = dict(manifest)
    manifest.setdefault("columns", columns)
    manifest.setdefault("created_utc", _dt.datetime.now(_dt.timezone.utc).isoformat())
    with open(d / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return d


def read_embedding_cache(directory) -> tuple[np.ndarray, list[str], np.ndarray, dict]:
    d = Path(directory)
    with open(d / "manifest.json") as fh:
        manifest = json.load(fh)
    with open(d / "embeddings.csv", newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        values = np.array([[float(v) for v in row] for row in reader], dtype=float)
    with open(d / "labels.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        labels = np.array([int(row[0]) for row in reader], dtype=np.int64)
    if columns != manifest.get("columns"):
        raise ValueError(f"{d}: embeddings.csv header disagrees with manifest columns")
    return values.reshape(len(labels), len(columns)), columns, labels, manifest


# -- trace export ----------------------------------------------------------------


def observable_names(n: int, pairs) -> list[str]:
    return [f"Z_{i + 1}" for i in range(n)] + [f"Z_{i + 1}Z_{j + 1}" for i, j in pairs]


def write_trace_csv(path, times, z: np.ndarray, zz: np.ndarray, pairs) -> None:
    """Long-format trace: one ``(time_us, observable, value)`` row per measurement."""
    names = observable_names(z.shape[1], pairs)
    rows = []
    for k, t in enumerate(times):
        for name, v in zip(names, np.concatenate([z[k], zz[k]])):
            rows.append([float(t), name, float(v)])
    write_csv(path, ["time_us", "observable", "value"], rows)


def read_trace_csv(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """``observable -> (times, values)`` from a file written by :func:`write_trace_csv`."""
    out: dict[str, tuple[list, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            ts, vs = out.setdefault(row["observable"], ([], []))
            ts.append(float(row["time_us"]))
            vs.append(float(row["value"]))
    return {k: (np.array(t), np.array(v)) for k, (t, v) in out.items()}


def write_diagnostics_csv(path, trace) -> None:
    rows = zip(
        trace.times.tolist(),
        trace.norm.tolist(),
        trace.energy.tolist(),
        trace.max_chi.tolist(),
        trace.discarded_weight.tolist(),
    )
    write_csv(path, ["time_us", "norm", "energy", "max_chi", "discarded_weight"], rows)
