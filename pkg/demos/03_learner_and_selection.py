"""
The softmax learner and the exploitation/exploration selector
=============================================================

A softmax model of the user's ratings, and how the next feedback candidates
are chosen: expected gradient length finds the patterns that would move the
model most, greedy k-center keeps the chosen set diverse.
"""

import numpy as np

from patlearn.core import FeatureVector
from patlearn.learner import SoftmaxModel, TrainingSet, cost, predict_proba, train
from patlearn.select import SelectionStrategy, Variant, egl, k_center, select_for_feedback

rng = np.random.default_rng(3)

# 30 rated patterns in a 6-dimensional embedding, two rating classes
X = rng.normal(size=(30, 6))
w = rng.normal(size=6)
y = np.where(X @ w >= 0, 1, 2)
rated = TrainingSet(X=X, y=y)

model = SoftmaxModel.zeros(class_count=2, feature_dim=6, lam=0.1)
print(f"cost before training: {cost(model, rated):.4f} (= ln 2 at zero weights)")
model = train(model, rated)
print(f"cost after training:  {cost(model, rated):.4f}")
print("p(class|x) for one pattern:", np.round(predict_proba(model, X[0]), 3))

# --- expected gradient length: high for candidates the model is unsure about,
# scaled by the candidate's magnitude; zero for a zero vector
pool = [FeatureVector(d=6, values=rng.normal(size=6)) for _ in range(40)]
scores = [egl(model, v) for v in pool]
print(f"\nEGL over a 40-candidate batch: min {min(scores):.3f} max {max(scores):.3f}")

# --- greedy k-center spreads the picks: compare the EGL top-10 with the
# hybrid strategy's picks (retain top 50% by EGL, then 10 centers)
top10 = select_for_feedback(SelectionStrategy(variant=Variant.EGL_ONLY, k=10), model, pool, iteration=2)
hybrid = select_for_feedback(SelectionStrategy(variant=Variant.EGL_THEN_KCENTER, k=10), model, pool, iteration=2)
print("EGL-only picks:", sorted(top10))
print("hybrid picks:  ", sorted(hybrid))


def spread(indices):
    pts = [pool[i].to_dense() for i in indices]
    return min(
        float(np.linalg.norm(a - b)) for i, a in enumerate(pts) for b in pts[i + 1 :]
    )


print(f"closest pair within EGL-only picks: {spread(top10):.3f}")
print(f"closest pair within hybrid picks:   {spread(hybrid):.3f} (more spread out)")

# the very first iteration has no trained model: pure k-center over the batch
first = select_for_feedback(SelectionStrategy(k=10), None, pool, iteration=1)
assert first == k_center(pool, 10, seed_index=0)
print("\niteration 1 falls back to pure k-center:", sorted(first))
