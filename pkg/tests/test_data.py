import gzip
import struct

import numpy as np
import pytest

from rydberg_qelm.data import (
    IdxFormatError,
    ImageDataset,
    load_csv_dataset,
    load_mnist,
    read_embedding_cache,
    read_idx,
    read_idx_images,
    read_idx_labels,
    sha256_arrays,
    sha256_file,
    subset,
    write_embedding_cache,
    write_idx,
)


def _hand_images(path):
    header = struct.pack(">IIII", 0x00000803, 2, 2, 2)
    path.write_bytes(header + bytes([0, 255, 128, 64, 1, 2, 3, 4]))


def test_hand_built_fixture(tmp_path):
    p = tmp_path / "img"
    _hand_images(p)
    img = read_idx_images(p)
    assert img.shape == (2, 4)
    assert np.allclose(img[0], [0, 1, 128 / 255, 64 / 255])
    assert np.allclose(img[1], np.array([1, 2, 3, 4]) / 255)
    lab = tmp_path / "lab"
    lab.write_bytes(struct.pack(">II", 0x00000801, 3) + bytes([7, 0, 9]))
    assert read_idx_labels(lab).tolist() == [7, 0, 9]


def test_empty_file_fails_at_offset_zero(tmp_path):
    p = tmp_path / "empty"
    p.write_bytes(b"")
    with pytest.raises(IdxFormatError) as info:
        read_idx(p)
    assert info.value.offset == 0 and "magic" in str(info.value)


def test_wrong_magic_and_truncation(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(struct.pack(">IIII", 0x00000D03, 1, 1, 1) + b"\x00")
    with pytest.raises(IdxFormatError, match="magic"):
        read_idx(p)
    t = tmp_path / "short"
    t.write_bytes(struct.pack(">IIII", 0x00000803, 2, 2, 2) + b"\x00" * 5)
    with pytest.raises(IdxFormatError) as info:
        read_idx(t)
    assert info.value.offset == 16
    h = tmp_path / "header"
    h.write_bytes(struct.pack(">I", 0x00000803) + b"\x00\x00")
    with pytest.raises(IdxFormatError) as info:
        read_idx(h)
    assert info.value.offset == 4


def test_kind_mismatch(tmp_path):
    p = tmp_path / "img"
    _hand_images(p)
    with pytest.raises(IdxFormatError):
        read_idx_labels(p)
    lab = tmp_path / "lab"
    write_idx(lab, np.arange(3))
    with pytest.raises(IdxFormatError):
        read_idx_images(lab)


@pytest.mark.parametrize("name", ["raw", "packed.gz"])
def test_idx_roundtrip(tmp_path, rng, name):
    arr = rng.integers(0, 256, size=(5, 28, 28)).astype(np.uint8)
    p = tmp_path / name
    write_idx(p, arr)
    assert np.array_equal(read_idx(p), arr)
    if name.endswith(".gz"):
        with gzip.open(p, "rb") as fh:
            assert fh.read(4) == b"\x00\x00\x08\x03"


def test_gzip_output_is_reproducible(tmp_path):
    arr = np.arange(12, dtype=np.uint8)
    write_idx(tmp_path / "a.gz", arr)
    write_idx(tmp_path / "b.gz", arr)
    assert sha256_file(tmp_path / "a.gz") == sha256_file(tmp_path / "b.gz")


def test_load_mnist_names(tmp_path, rng):
    write_idx(tmp_path / "train-images-idx3-ubyte.gz", rng.integers(0, 256, size=(4, 28, 28)))
    write_idx(tmp_path / "train-labels-idx1-ubyte", np.array([1, 2, 3, 4]))
    ds = load_mnist(tmp_path)
    assert ds.images.shape == (4, 784) and ds.labels.tolist() == [1, 2, 3, 4]
    assert np.all((ds.images >= 0) & (ds.images <= 1))
    with pytest.raises(FileNotFoundError):
        load_mnist(tmp_path, "test")
    write_idx(tmp_path / "t10k-images-idx3-ubyte", rng.integers(0, 256, size=(3, 28, 28)))
    write_idx(tmp_path / "t10k-labels-idx1-ubyte", np.array([1, 2]))
    with pytest.raises(ValueError):
        load_mnist(tmp_path, "test")


def _toy(n=20):
    return ImageDataset(np.arange(n * 2, dtype=float).reshape(n, 2), np.arange(n) % 10)


def test_subset_disjoint_and_deterministic():
    ds = _toy()
    tr, te = subset(ds, 12, 5, seed=4)
    tr2, te2 = subset(ds, 12, 5, seed=4)
    assert np.array_equal(tr.images, tr2.images) and np.array_equal(te.labels, te2.labels)
    assert not set(tr.images[:, 0]) & set(te.images[:, 0])
    assert len(tr) == 12 and len(te) == 5
    full, empty = subset(ds, 20, 0, seed=4)
    perm = np.random.default_rng(4).permutation(20)
    assert np.array_equal(full.images, ds.images[perm]) and len(empty) == 0
    with pytest.raises(ValueError):
        subset(ds, 15, 6, seed=0)


def test_csv_dataset(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n0.5,1,3\n2,0.25,7\n")
    ds = load_csv_dataset(p, "label")
    assert ds.labels.tolist() == [3, 7]
    assert np.allclose(ds.images, [[0.5, 1], [2, 0.25]])


def test_embedding_cache_roundtrip(tmp_path, rng):
    values = rng.uniform(-1, 1, size=(3, 4))
    cols = ["t=0.5:Z_1", "t=0.5:Z_2", "t=1:Z_1", "t=1:Z_2"]
    write_embedding_cache(tmp_path / "c", values, cols, np.array([4, 5, 6]), {"method": "one-site"})
    back, bcols, labels, manifest = read_embedding_cache(tmp_path / "c")
    assert np.array_equal(back, values)
    assert bcols == cols and labels.tolist() == [4, 5, 6]
    assert manifest["columns"] == cols and "created_utc" in manifest
    text = (tmp_path / "c" / "embeddings.csv").read_text()
    assert "\r" not in text and text.splitlines()[0] == ",".join(cols)


def test_array_hash_sensitivity():
    a = np.arange(6.0)
    assert sha256_arrays(a) == sha256_arrays(a.copy())
    assert sha256_arrays(a) != sha256_arrays(a.reshape(2, 3))
    assert sha256_arrays(a) != sha256_arrays(a.astype(np.float32))


def test_bundled_mnist_sample(mnist_dir):
    ds = load_mnist(mnist_dir)
    assert ds.images.shape[1] == 784
    assert set(np.unique(ds.labels)) == set(range(10))
    assert ds.images.min() >= 0 and ds.images.max() <= 1


def test_official_training_file_size(mnist_dir):
    ds = load_mnist(mnist_dir)
    if len(ds) != 60000:
        pytest.skip(f"official 60k training file not present ({len(ds)} records found)")
    assert ds.images.shape == (60000, 784)
