"""Classical preprocessing and readout heads.

PCA, min-max rescaling to a detuning range, and dense classifiers (a single
softmax layer or a ReLU MLP) trained with Adam on mean sparse categorical
cross-entropy plus an L1 penalty on the weight matrices. Everything runs on
numpy and is reproducible under a fixed seed.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

N_CLASSES = 10


# -- PCA ---------------------------------------------------------------------


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, features), orthonormal rows
    explained_variance: np.ndarray
    zero_variance: np.ndarray  # bool per component

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(train: np.ndarray, k: int) -> PcaModel:
    """Top-``k`` eigenvectors of the (population) training covariance.

    Each component's largest-magnitude entry is made positive.
    """
    x = np.asarray(train, dtype=float)
    rows, cols = x.shape
    if not 1 <= k <= min(rows, cols):
        raise ValueError(f"k={k} must lie in [1, {min(rows, cols)}]")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / rows
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T.copy()
    for c in comps:
        if c[np.argmax(np.abs(c))] < 0:
            c *= -1
    zero = evals <= 1e-12 * max(1.0, float(evals[0]))
    if zero.any():
        warnings.warn(f"{int(zero.sum())} PCA components have zero variance", RuntimeWarning, stacklevel=2)
    return PcaModel(mean, comps, evals, zero)


def pca_transform(model: PcaModel, data: np.ndarray) -> np.ndarray:
    return (np.asarray(data, dtype=float) - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, coords: np.ndarray) -> np.ndarray:
    return coords @ model.components + model.mean


# -- min-max scaling ---------------------------------------------------------


@dataclass
class ScalerModel:
    minimum: np.ndarray
    maximum: np.ndarray
    low: float = -6.0
    high: float = 6.0


def scale_fit(train: np.ndarray, low: float = -6.0, high: float = 6.0) -> ScalerModel:
    x = np.asarray(train, dtype=float)
    return ScalerModel(x.min(axis=0), x.max(axis=0), low, high)


def scale_apply(model: ScalerModel, data: np.ndarray) -> np.ndarray:
    """Affine map train-min -> low, train-max -> high; constant features -> midpoint; clipped."""
    x = np.asarray(data, dtype=float)
    span = model.maximum - model.minimum
    mid = 0.5 * (model.low + model.high)
    safe = np.where(span > 0, span, 1.0)
    out = model.low + (x - model.minimum) * (model.high - model.low) / safe
    out = np.where(span > 0, out, mid)
    return np.clip(out, model.low, model.high)


# -- dense classifiers -------------------------------------------------------


Params = list[tuple[np.ndarray, np.ndarray]]


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params: Params, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Logits and the list of layer inputs (for backprop)."""
    acts = [x]
    h = x
    for li, (w, b) in enumerate(params):
        z = h @ w + b
        if li < len(params) - 1:
            h = np.maximum(z, 0.0)
            acts.append(h)
        else:
            h = z
    return h, acts


def loss_and_grads(params: Params, x: np.ndarray, y: np.ndarray, l1: float) -> tuple[float, Params]:
    """Mean cross-entropy + ``l1 * sum |W|`` and its gradient (subgradient at 0)."""
    logits, acts = forward(params, x)
    m = x.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -float(np.mean(logp[np.arange(m), y]))
    loss += l1 * sum(float(np.abs(w).sum()) for w, _ in params)
    delta = np.exp(logp)
    delta[np.arange(m), y] -= 1.0
    delta /= m
    grads: Params = [None] * len(params)  # type: ignore[list-item]
    for li in range(len(params) - 1, -1, -1):
        w, _ = params[li]
        a = acts[li]
        gw = a.T @ delta + l1 * np.sign(w)
        gb = delta.sum(axis=0)
        grads[li] = (gw, gb)
        if li > 0:
            delta = (delta @ w.T) * (a > 0)
    return loss, grads


class TrainingDiverged(FloatingPointError):
    pass


@dataclass
class ClassifierModel:
    architecture: str  # "linear" or "mlp-100-100" style
    params: Params
    l1: float
    lr: float
    epochs: int
    batch: int
    seed: int
    loss_curve: list[float] = field(default_factory=list)

    def logits(self, x: np.ndarray) -> np.ndarray:
        return forward(self.params, np.asarray(x, dtype=float))[0]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    def accuracy(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(x) == np.asarray(y)))

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "hyperparameters": {"l1": self.l1, "lr": self.lr, "epochs": self.epochs, "batch": self.batch},
            "seed": self.seed,
            "loss_curve": self.loss_curve,
            "weights": [{"W": w.tolist(), "b": b.tolist()} for w, b in self.params],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        with open(path) as fh:
            d = json.load(fh)
        hp = d["hyperparameters"]
        params = [(np.array(layer["W"]), np.array(layer["b"])) for layer in d["weights"]]
        return cls(d["architecture"], params, hp["l1"], hp["lr"], hp["epochs"], hp["batch"], d["seed"], d["loss_curve"])


def init_params(sizes: Sequence[int], rng: np.random.Generator) -> Params:
    """Glorot-uniform weights, zero biases."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        params.append((rng.uniform(-lim, lim, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return params


def _train(
    x, y, hidden: Sequence[int], l1: float, epochs: int, lr: float, batch: int, seed: int, n_classes: int
) -> ClassifierModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y have different lengths")
    if y.min(initial=0) < 0 or y.max(initial=0) >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite values")
    rng = np.random.default_rng(seed)
    params = init_params([x.shape[1], *hidden, n_classes], rng)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m1 = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
    m2 = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
    step = 0
    curve = []
    n = x.shape[0]
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, batch):
            idx = order[s : s + batch]
            loss, grads = loss_and_grads(params, x[idx], y[idx], l1)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"loss became {loss} at epoch {epoch}, step {step}; lower the learning rate")
            total += loss * len(idx)
            step += 1
            corr1 = 1 - beta1**step
            corr2 = 1 - beta2**step
            new = []
            for li, ((w, b), (gw, gb)) in enumerate(zip(params, grads)):
                mw, mb = m1[li]
                vw, vb = m2[li]
                mw = beta1 * mw + (1 - beta1) * gw
                mb = beta1 * mb + (1 - beta1) * gb
                vw = beta2 * vw + (1 - beta2) * gw**2
                vb = beta2 * vb + (1 - beta2) * gb**2
                m1[li], m2[li] = (mw, mb), (vw, vb)
                w = w - lr * (mw / corr1) / (np.sqrt(vw / corr2) + eps)
                b = b - lr * (mb / corr1) / (np.sqrt(vb / corr2) + eps)
                new.append((w, b))
            params = new
        if not all(np.all(np.isfinite(w)) and np.all(np.isfinite(b)) for w, b in params):
            raise TrainingDiverged(f"weights became non-finite in epoch {epoch}; lower the learning rate")
        curve.append(total / n)
    arch = "linear" if not hidden else "mlp-" + "-".join(str(h) for h in hidden)
    return ClassifierModel(arch, params, l1, lr, epochs, batch, seed, curve)


def train_softmax(
    x, y, l1: float = 1e-4, epochs: int = 50, lr: float = 1e-3, batch: int = 128, seed: int = 0, n_classes: int = N_CLASSES
) -> ClassifierModel:
    return _train(x, y, (), l1, epochs, lr, batch, seed, n_classes)


def train_mlp(
    x,
    y,
    hidden: Sequence[int] = (100, 100),
    l1: float = 1e-4,
    epochs: int = 50,
    lr: float = 1e-3,
    batch: int = 128,
    seed: int = 0,
    n_classes: int = N_CLASSES,
) -> ClassifierModel:
    return _train(x, y, tuple(hidden), l1, epochs, lr, batch, seed, n_classes)


# -- cross-validation ----------------------------------------------------------


@dataclass
class KFoldResult:
    accuracies: np.ndarray
    folds: list[np.ndarray]  # held-out indices per fold

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def kfold_evaluate(
    x: np.ndarray,
    y: np.ndarray,
    k: int = 5,
    trainer: Callable[[np.ndarray, np.ndarray], ClassifierModel] | None = None,
    seed: int = 0,
) -> KFoldResult:
    """Train on ``k - 1`` folds, score on the held-out fold, for every fold."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    trainer = trainer or train_softmax
    folds = kfold_indices(len(y), k, seed)
    accs = []
    all_classes = set(np.unique(y).tolist())
    for f, test_idx in enumerate(folds):
        mask = np.ones(len(y), dtype=bool)
        mask[test_idx] = False
        missing = all_classes - set(np.unique(y[mask]).tolist())
        if missing:
            warnings.warn(f"fold {f}: classes {sorted(missing)} absent from training data", RuntimeWarning, stacklevel=2)
        model = trainer(x[mask], y[mask])
        accs.append(float(np.mean(model.predict(x[test_idx]) == y[test_idx])))
    return KFoldResult(np.array(accs), folds)
