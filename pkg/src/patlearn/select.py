"""Feedback-candidate selection: expected-gradient-length exploitation,
top-fraction retention, and greedy k-center exploration, plus the pure
variants used for ablation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import FeatureVector
from .learner import SoftmaxModel, predict_proba


class Variant(str, Enum):
    EGL_ONLY = "egl"
    KCENTER_ONLY = "kcenter"
    EGL_THEN_KCENTER = "hybrid"
    PHASED = "phased"


@dataclass(frozen=True)
class SelectionStrategy:
    variant: Variant = Variant.EGL_THEN_KCENTER
    k: int = 10
    retain_fraction: float = 0.5
    explore_iters: int = 10  # phased: pure exploration for this many iterations
    hybrid_iters: int = 10  # phased: then retain+k-center for this many more

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 < self.retain_fraction <= 1.0:
            raise ValueError("retain_fraction must lie in (0, 1]")


def egl(model: SoftmaxModel, x) -> float:
    """Expected length of the gradient this candidate would induce, over its
    possible labels weighted by the model's current class probabilities.

    For hypothesized label j the candidate's own gradient contribution has
    rows -x * (1{j'=j} - p_j') over classes j'; the intercept column and the
    regularization term are candidate-independent and excluded.
    """
    vec = x.to_dense() if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    p = predict_proba(model, vec)
    xnorm = float(np.linalg.norm(vec))
    total = 0.0
    for j in range(model.class_count):
        residual = -p.copy()
        residual[j] += 1.0
        total += p[j] * xnorm * float(np.linalg.norm(residual))
    return total


def egl_scores(model: SoftmaxModel, vectors) -> np.ndarray:
    return np.array([egl(model, v) for v in vectors])


# ---------------------------------------------------------------------------
# distances and greedy k-center


def jaccard_distance(a: FeatureVector, b: FeatureVector) -> float:
    """1 - |A∩B|/|A∪B| over the set bits; two empty sets are at distance 0."""
    sa, sb = set(a.indices), set(b.indices)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return 1.0 - len(sa & sb) / union


def euclidean_distance(a: FeatureVector, b: FeatureVector) -> float:
    return float(np.linalg.norm(a.to_dense() - b.to_dense()))


def _distance_for(points) -> "callable":
    sparse = [p.is_sparse for p in points]
    if all(sparse):
        return jaccard_distance
    if not any(sparse):
        return euclidean_distance
    raise ValueError("mixed sparse/dense representations")


def k_center(points, k: int, distance=None, seed_index: int = 0) -> list:
    """Gonzalez greedy 2-approximation: start from seed_index, repeatedly add
    the point farthest from its nearest chosen center (ties to the smallest
    index).  O(k*n) distance evaluations."""
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= len(points)")
    if distance is None:
        distance = _distance_for(points)
    chosen = [seed_index]
    nearest = np.array([distance(points[seed_index], p) for p in points])
    while len(chosen) < k:
        nxt = int(np.argmax(nearest))  # argmax takes the smallest index on ties
        chosen.append(nxt)
        dists = np.array([distance(points[nxt], p) for p in points])
        np.minimum(nearest, dists, out=nearest)
    return chosen


# ---------------------------------------------------------------------------
# per-iteration selection


def _top_by_score(scores: np.ndarray, count: int) -> list:
    order = np.lexsort((np.arange(len(scores)), -scores))  # score desc, index asc
    return [int(i) for i in order[:count]]


def select_for_feedback(strategy: SelectionStrategy, model, vectors, iteration: int) -> list:
    """Indices (into `vectors`) of the <= k patterns whose ratings to request.

    Iteration 1, or an untrained model, falls back to pure k-center over the
    whole batch.  The k-center seed is the highest-EGL candidate when EGL was
    computed for the variant, index 0 otherwise.
    """
    n = len(vectors)
    if n == 0:
        raise ValueError("batch is empty")
    k = strategy.k
    if n <= k:
        return list(range(n))

    variant = strategy.variant
    if variant == Variant.PHASED:
        if iteration <= strategy.explore_iters:
            variant = Variant.KCENTER_ONLY
        elif iteration <= strategy.explore_iters + strategy.hybrid_iters:
            variant = Variant.EGL_THEN_KCENTER
        else:
            variant = Variant.EGL_ONLY

    if model is None or iteration <= 1 or variant == Variant.KCENTER_ONLY:
        return k_center(vectors, k, seed_index=0)

    scores = egl_scores(model, vectors)
    if variant == Variant.EGL_ONLY:
        return _top_by_score(scores, k)

    # retain the top fraction by EGL, then spread k centers among them
    retained = _top_by_score(scores, math.ceil(strategy.retain_fraction * n))
    kept_points = [vectors[i] for i in retained]
    picked = k_center(kept_points, min(k, len(kept_points)), seed_index=0)
    return [retained[i] for i in picked]
