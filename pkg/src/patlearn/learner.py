"""Multinomial logistic regression over pattern feature vectors.

Weight matrix is c x (d+1); the last column is an unregularized intercept fed
by a constant-1 feature.  Models are immutable values; train() returns a new
model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .core import FeatureVector


@dataclass(frozen=True)
class SoftmaxModel:
    theta: np.ndarray  # c x (d+1)
    lam: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.ndim != 2 or theta.shape[0] < 2:
            raise ValueError("theta must be c x (d+1) with c >= 2")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta entries must be finite")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        object.__setattr__(self, "theta", theta)

    @property
    def class_count(self) -> int:
        return self.theta.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.theta.shape[1] - 1

    @staticmethod
    def zeros(class_count: int, feature_dim: int, lam: float = 1.0) -> "SoftmaxModel":
        return SoftmaxModel(theta=np.zeros((class_count, feature_dim + 1)), lam=lam)


@dataclass(frozen=True)
class TrainingSet:
    X: np.ndarray  # m x d
    y: np.ndarray  # m ratings in {1..c}

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or len(y) != X.shape[0]:
            raise ValueError("X must be m x d with one rating per row")
        if len(y) and y.min() < 1:
            raise ValueError("ratings are positive integers")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_examples(cls, examples) -> "TrainingSet":
        """examples: iterable of (FeatureVector, rating)."""
        pairs = list(examples)
        if not pairs:
            raise ValueError("training set is empty")
        X = np.stack([fv.to_dense() for fv, _ in pairs])
        y = np.array([rating for _, rating in pairs], dtype=np.int64)
        return cls(X=X, y=y)

    def __len__(self) -> int:
        return len(self.y)


def _as_row(model: SoftmaxModel, x) -> np.ndarray:
    vec = x.to_dense() if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    if vec.shape != (model.feature_dim,):
        raise ValueError(f"feature dimension {vec.shape} does not match model d={model.feature_dim}")
    return vec


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _check(model: SoftmaxModel, train: TrainingSet):
    if len(train) == 0:
        raise ValueError("training set is empty")
    if train.X.shape[1] != model.feature_dim:
        raise ValueError("training feature dimension does not match the model")
    if train.y.max() > model.class_count:
        raise ValueError("rating outside the declared class range")


def predict_proba_matrix(model: SoftmaxModel, X: np.ndarray) -> np.ndarray:
    """Row-wise class probabilities, computed with max-subtraction."""
    z = _augment(X) @ model.theta.T
    z -= z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


def predict_proba(model: SoftmaxModel, x) -> np.ndarray:
    return predict_proba_matrix(model, _as_row(model, x)[None, :])[0]


def predict_matrix(model: SoftmaxModel, X: np.ndarray) -> np.ndarray:
    """Class labels in {1..c}; ties break toward the smaller label."""
    return predict_proba_matrix(model, X).argmax(axis=1) + 1


def predict(model: SoftmaxModel, x) -> int:
    return int(predict_matrix(model, _as_row(model, x)[None, :])[0])


def cost(model: SoftmaxModel, train: TrainingSet) -> float:
    _check(model, train)
    z = _augment(train.X) @ model.theta.T
    nll = logsumexp(z, axis=1) - z[np.arange(len(train)), train.y - 1]
    reg = 0.5 * model.lam * float(np.sum(model.theta[:, :-1] ** 2))
    return float(nll.mean() + reg)


def gradient(model: SoftmaxModel, train: TrainingSet) -> np.ndarray:
    """c x (d+1) matrix of partials; the lambda term is zeroed on the intercept
    column."""
    _check(model, train)
    xhat = _augment(train.X)
    p = predict_proba_matrix(model, train.X)
    onehot = np.zeros_like(p)
    onehot[np.arange(len(train)), train.y - 1] = 1.0
    grad = (p - onehot).T @ xhat / len(train)
    grad[:, :-1] += model.lam * model.theta[:, :-1]
    return grad


def train(model: SoftmaxModel, train_set: TrainingSet, max_iter: int = 500, gtol: float = 1e-6) -> SoftmaxModel:
    """Minimize the regularized cost with L-BFGS-B, warm-started from the
    passed model's weights; converged when the gradient max-norm drops below
    gtol or after max_iter iterations."""
    _check(model, train_set)
    shape = model.theta.shape

    def objective(flat: np.ndarray):
        m = SoftmaxModel(theta=flat.reshape(shape), lam=model.lam)
        value = cost(m, train_set)
        if not np.isfinite(value):
            raise FloatingPointError("non-finite cost during optimization")
        return value, gradient(m, train_set).ravel()

    result = minimize(
        objective,
        model.theta.ravel(),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": gtol, "ftol": 1e-15},
    )
    return SoftmaxModel(theta=result.x.reshape(shape), lam=model.lam)


def weighted_f_score(predictions, truths) -> float:
    """Per-class F1 averaged with weights proportional to true-instance counts."""
    preds = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truths, dtype=np.int64)
    if preds.shape != truth.shape or preds.ndim != 1 or len(preds) == 0:
        raise ValueError("predictions and truths must be equal-length non-empty vectors")
    total = 0.0
    for label in np.unique(truth):
        tp = int(np.sum((preds == label) & (truth == label)))
        fp = int(np.sum((preds == label) & (truth != label)))
        fn = int(np.sum((preds != label) & (truth == label)))
        f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        total += f1 * int(np.sum(truth == label)) / len(truth)
    return float(total)


MODEL_FORMAT_VERSION = 1


def save_model(path, model: SoftmaxModel) -> None:
    np.savez(
        path,
        version=MODEL_FORMAT_VERSION,
        theta=model.theta,
        lam=model.lam,
        class_count=model.class_count,
        feature_dim=model.feature_dim,
    )


def load_model(path) -> SoftmaxModel:
    with np.load(path) as blob:
        if int(blob["version"]) != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {blob['version']}")
        return SoftmaxModel(theta=blob["theta"], lam=float(blob["lam"]))
