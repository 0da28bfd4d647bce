import math

import numpy as np
import pytest

from patlearn.core import FeatureVector
from patlearn.learner import (
    SoftmaxModel,
    TrainingSet,
    cost,
    gradient,
    load_model,
    predict,
    predict_proba,
    save_model,
    train,
    weighted_f_score,
)

from .oracles import finite_difference_gradient


def random_instance(rng, c=None, d=None, m=None):
    c = c or int(rng.integers(2, 5))
    d = d or int(rng.integers(1, 9))
    m = m or int(rng.integers(1, 16))
    model = SoftmaxModel(theta=rng.normal(size=(c, d + 1)), lam=float(rng.uniform(0, 2)))
    train_set = TrainingSet(X=rng.normal(size=(m, d)), y=rng.integers(1, c + 1, size=m))
    return model, train_set


# ---------------------------------------------------------------------------
# probabilities and prediction


def test_zero_theta_gives_uniform_probabilities():
    model = SoftmaxModel.zeros(3, 4)
    p = predict_proba(model, np.zeros(4))
    assert np.allclose(p, [1 / 3, 1 / 3, 1 / 3])


def test_two_class_log_odds():
    # theta_1.xhat - theta_2.xhat = ln 3  ->  p = (0.75, 0.25)
    theta = np.zeros((2, 3))
    theta[0, 2] = math.log(3)
    model = SoftmaxModel(theta=theta, lam=0.0)
    p = predict_proba(model, np.zeros(2))
    assert np.allclose(p, [0.75, 0.25], atol=1e-12)


def test_probabilities_sum_to_one_and_no_overflow():
    rng = np.random.default_rng(0)
    for _ in range(30):
        model, ts = random_instance(rng)
        p = predict_proba(model, ts.X[0] * 500)  # large logits: max-subtraction must hold
        assert abs(p.sum() - 1.0) < 1e-9
        assert np.all(p >= 0)


def test_predict_tie_breaks_to_smallest_label():
    model = SoftmaxModel.zeros(4, 3)
    assert predict(model, np.zeros(3)) == 1


def test_predict_matches_argmax_of_probabilities():
    rng = np.random.default_rng(1)
    for _ in range(20):
        model, ts = random_instance(rng)
        x = ts.X[0]
        assert predict(model, x) == int(np.argmax(predict_proba(model, x))) + 1


def test_dimension_mismatch_rejected():
    model = SoftmaxModel.zeros(2, 3)
    with pytest.raises(ValueError):
        predict_proba(model, np.zeros(5))


def test_softmax_shift_invariance():
    rng = np.random.default_rng(2)
    model, ts = random_instance(rng, c=3, d=4)
    shift = rng.normal(size=model.theta.shape[1])
    shifted = SoftmaxModel(theta=model.theta + shift, lam=model.lam)
    for x in ts.X:
        assert np.allclose(predict_proba(model, x), predict_proba(shifted, x), atol=1e-9)
        assert predict(model, x) == predict(shifted, x)


def test_accepts_feature_vectors():
    model = SoftmaxModel.zeros(2, 4)
    assert predict(model, FeatureVector(d=4, indices=(1, 3))) == 1


# ---------------------------------------------------------------------------
# cost and gradient


def test_cost_at_zero_theta_is_log_class_count():
    ts = TrainingSet(X=np.ones((4, 3)), y=np.array([1, 2, 1, 2]))
    assert math.isclose(cost(SoftmaxModel.zeros(2, 3, lam=0.0), ts), math.log(2), rel_tol=1e-12)
    # the regularizer vanishes at zero theta regardless of lambda
    assert math.isclose(cost(SoftmaxModel.zeros(2, 3, lam=5.0), ts), math.log(2), rel_tol=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    model, ts = random_instance(rng, c=5, d=3, m=12)
    flat = model.theta.ravel()

    def f(v):
        return cost(SoftmaxModel(theta=v.reshape(model.theta.shape), lam=model.lam), ts)

    fd = finite_difference_gradient(f, flat, h=1e-6)
    analytic = gradient(model, ts).ravel()
    rel = np.abs(analytic - fd) / np.maximum(1e-8, np.abs(fd))
    assert rel.max() < 1e-5


def test_gradient_is_lambda_theta_when_fit_is_perfect():
    # single example whose class probability is (numerically) 1
    theta = np.zeros((2, 2))
    theta[0, 0] = 60.0
    model = SoftmaxModel(theta=theta, lam=0.7)
    ts = TrainingSet(X=np.array([[1.0]]), y=np.array([1]))
    g = gradient(model, ts)
    expected = model.lam * theta
    expected[:, -1] = 0.0
    assert np.allclose(g, expected, atol=1e-12)


def test_cost_is_convex_along_segments():
    rng = np.random.default_rng(4)
    for _ in range(20):
        model_a, ts = random_instance(rng, c=3, d=4, m=10)
        theta_b = rng.normal(size=model_a.theta.shape)
        t = float(rng.uniform(0.05, 0.95))
        mix = SoftmaxModel(theta=t * model_a.theta + (1 - t) * theta_b, lam=model_a.lam)
        upper = t * cost(model_a, ts) + (1 - t) * cost(SoftmaxModel(theta=theta_b, lam=model_a.lam), ts)
        assert cost(mix, ts) <= upper + 1e-9


# ---------------------------------------------------------------------------
# training


def separable_training_set(rng, m=20, d=4, margin=1.0):
    X = rng.normal(size=(m, d))
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)  # unit normal: margin below is geometric
    scores = X @ w
    shift = np.where(scores >= 0, margin, -margin) + scores - X @ w
    X += np.outer(shift, w)
    y = np.where(X @ w >= 0, 1, 2)
    return TrainingSet(X=X, y=y)


def test_training_reaches_low_gradient_and_low_cost():
    rng = np.random.default_rng(5)
    ts = separable_training_set(rng)
    model = train(SoftmaxModel.zeros(2, 4, lam=1.0), ts)
    assert np.abs(gradient(model, ts)).max() < 1e-4
    assert cost(model, ts) < math.log(2)


def test_training_separable_data_is_perfect():
    rng = np.random.default_rng(6)
    ts = separable_training_set(rng)
    model = train(SoftmaxModel.zeros(2, 4, lam=1.0), ts)
    preds = [predict(model, x) for x in ts.X]
    assert np.array_equal(preds, ts.y)


def test_warm_start_at_optimum_is_a_fixed_point():
    rng = np.random.default_rng(7)
    ts = separable_training_set(rng, m=15)
    model = train(SoftmaxModel.zeros(2, 4, lam=1.0), ts)
    again = train(model, ts)
    assert np.abs(again.theta - model.theta).max() < 1e-8


def test_class_swap_symmetry():
    rng = np.random.default_rng(8)
    ts = separable_training_set(rng)
    swapped = TrainingSet(X=ts.X, y=np.where(ts.y == 1, 2, 1))
    m1 = train(SoftmaxModel.zeros(2, 4, lam=1.0), ts)
    m2 = train(SoftmaxModel.zeros(2, 4, lam=1.0), swapped)
    p1 = [predict(m1, x) for x in ts.X]
    p2 = [predict(m2, x) for x in ts.X]
    assert p2 == [2 if p == 1 else 1 for p in p1]


def test_empty_training_set_rejected():
    with pytest.raises(ValueError):
        TrainingSet.from_examples([])
    with pytest.raises(ValueError):
        cost(SoftmaxModel.zeros(2, 1), TrainingSet(X=np.zeros((0, 1)), y=np.zeros(0, dtype=int)))


# ---------------------------------------------------------------------------
# weighted F-score


def test_perfect_predictions_score_one():
    assert weighted_f_score([1, 2, 2, 3], [1, 2, 2, 3]) == 1.0


def test_hand_computed_confusion():
    # class 1: F1 = 2/3; class 2: F1 = 4/5; equal weights -> 11/15
    got = weighted_f_score([1, 2, 2, 2], [1, 1, 2, 2])
    assert math.isclose(got, 11 / 15, rel_tol=1e-12)


def test_majority_collapse_scores_one_third():
    got = weighted_f_score([1, 1, 1, 1], [1, 1, 2, 2])
    assert math.isclose(got, 1 / 3, rel_tol=1e-12)


def test_f_score_invariant_under_relabeling():
    rng = np.random.default_rng(9)
    truths = rng.integers(1, 4, size=40)
    preds = rng.integers(1, 4, size=40)
    relabel = {1: 3, 2: 1, 3: 2}
    a = weighted_f_score(preds, truths)
    b = weighted_f_score([relabel[p] for p in preds], [relabel[t] for t in truths])
    assert math.isclose(a, b, rel_tol=1e-12)


def test_f_score_length_mismatch_rejected():
    with pytest.raises(ValueError):
        weighted_f_score([1, 2], [1])


# ---------------------------------------------------------------------------
# persistence


def test_model_round_trip(tmp_path):
    rng = np.random.default_rng(10)
    model = SoftmaxModel(theta=rng.normal(size=(3, 5)), lam=0.5)
    path = tmp_path / "model.npz"
    save_model(path, model)
    loaded = load_model(path)
    assert np.array_equal(loaded.theta, model.theta)
    assert loaded.lam == model.lam
