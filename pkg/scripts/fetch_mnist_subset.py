"""Write the 5,000-image MNIST sample shipped with mlxtend as IDX files.

    python scripts/fetch_mnist_subset.py [out_dir]

The default target is $QELM_DATA_DIR or data/mnist. Any directory holding
train-images-idx3-ubyte(.gz) and train-labels-idx1-ubyte(.gz) works too,
including the full 60k MNIST download.
"""

import sys
from pathlib import Path

from rydberg_qelm.data import default_data_dir, load_mnist, sha256_file, write_bundled_mnist


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else default_data_dir()
    write_bundled_mnist(out)
    ds = load_mnist(out)
    print(f"{len(ds.labels)} images written to {out}")
    for p in sorted(out.glob("train-*")):
        print(f"  {p.name}  sha256 {sha256_file(p)[:16]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
