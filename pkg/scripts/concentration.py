"""Exponential-concentration probe: mean population variance of the Z columns vs chain length.

Uses 200 training images, Omega = 6pi, d = 11 um, PCA with k = n.
"""

import sys

import numpy as np

from rydberg_qelm.data import default_data_dir, load_mnist, subset
from rydberg_qelm.embedding import concentration_metric, embed_dataset
from rydberg_qelm.hamiltonian import ChainSpec
from rydberg_qelm.ml import pca_fit, pca_transform, scale_apply, scale_fit
from rydberg_qelm.tdvp import EvolutionConfig

sizes = [int(a) for a in sys.argv[1:]] or [4, 6, 8, 10]
train, _ = subset(load_mnist(default_data_dir()), 2000, 500, seed=0)
for n in sizes:
    pca = pca_fit(train.images, n)
    scaler = scale_fit(pca_transform(pca, train.images))
    feats = scale_apply(scaler, pca_transform(pca, train.images[:200]))
    for method in ("one-site", "two-site"):
        emb = embed_dataset(feats, ChainSpec(n=n, omega=6 * np.pi), EvolutionConfig(method=method, record_energy=False))
        print(f"n={n:2d} {method:8s} metric {concentration_metric(emb):.5f}", flush=True)
