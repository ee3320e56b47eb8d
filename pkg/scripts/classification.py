"""QELM-linear vs PCA-linear vs PCA+MLP on 2,500 MNIST records, 5-fold CV.

Also reports QELM-linear accuracy truncated at each total evolution time.
Embedding takes a few minutes on one core.
"""

import numpy as np

from rydberg_qelm.data import default_data_dir, load_mnist, subset
from rydberg_qelm.embedding import embed_dataset
from rydberg_qelm.hamiltonian import ChainSpec
from rydberg_qelm.ml import kfold_evaluate, pca_fit, pca_transform, scale_apply, scale_fit, train_mlp, train_softmax
from rydberg_qelm.tdvp import EvolutionConfig

train, test = subset(load_mnist(default_data_dir()), 2000, 500, seed=0)
pca = pca_fit(train.images, 10)
scaler = scale_fit(pca_transform(pca, train.images))
x = scale_apply(scaler, pca_transform(pca, np.vstack([train.images, test.images])))
y = np.concatenate([train.labels, test.labels])

emb = embed_dataset(x, ChainSpec(n=10, omega=2 * np.pi, spacing_um=11.0), EvolutionConfig(record_energy=False))
for name, feats, head in (
    ("QELM-linear", emb.values, train_softmax),
    ("PCA-linear", x, train_softmax),
    ("PCA+MLP", x, train_mlp),
):
    r = kfold_evaluate(feats, y, 5, head, seed=0)
    print(f"{name:12s} {r.mean:.4f} +/- {r.std:.4f}")
for t in emb.times:
    r = kfold_evaluate(emb.up_to(t).values, y, 5, train_softmax, seed=0)
    print(f"T = {t:3.1f} us  QELM-linear {r.mean:.4f}")
