import math

import numpy as np
import pytest

from patlearn.core import FeatureVector
from patlearn.learner import SoftmaxModel
from patlearn.select import (
    SelectionStrategy,
    Variant,
    egl,
    euclidean_distance,
    jaccard_distance,
    k_center,
    select_for_feedback,
)

from .oracles import egl_by_literal_formula, kcenter_optimal_radius, kcenter_radius


def dense(values):
    values = np.asarray(values, dtype=float)
    return FeatureVector(d=len(values), values=values)


# ---------------------------------------------------------------------------
# expected gradient length


def test_egl_zero_vector_is_zero():
    model = SoftmaxModel(theta=np.random.default_rng(0).normal(size=(3, 5)))
    assert egl(model, np.zeros(4)) == 0.0


def test_egl_vanishes_when_model_is_certain():
    theta = np.zeros((2, 3))
    theta[0, :] = 40.0
    model = SoftmaxModel(theta=theta)
    assert egl(model, np.ones(2)) < 1e-12


def test_egl_uniform_two_class_closed_form():
    # p = (1/2, 1/2), |x| = 1: each hypothesis matrix has rows +-x/2, so
    # EGL = 0.5*sqrt(1/2) + 0.5*sqrt(1/2) = sqrt(2)/2
    model = SoftmaxModel.zeros(2, 2)
    x = np.array([1.0, 0.0])
    assert math.isclose(egl(model, x), math.sqrt(2) / 2, rel_tol=1e-12)


def test_egl_matches_literal_formula_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(100):
        c = int(rng.integers(2, 5))
        d = int(rng.integers(1, 7))
        model = SoftmaxModel(theta=rng.normal(size=(c, d + 1)))
        x = rng.normal(size=d)
        expected = egl_by_literal_formula(model.theta, x)
        got = egl(model, x)
        assert got >= 0.0
        assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))


def test_egl_scales_with_the_candidate_at_uniform_probabilities():
    model = SoftmaxModel.zeros(3, 4)
    x = np.array([0.3, -0.2, 0.8, 0.1])
    assert math.isclose(egl(model, 2.5 * x), 2.5 * egl(model, x), rel_tol=1e-12)


# ---------------------------------------------------------------------------
# distances and k-center


def test_jaccard_distance_cases():
    a = FeatureVector(d=5, indices=(0, 1))
    b = FeatureVector(d=5, indices=(1, 2))
    assert math.isclose(jaccard_distance(a, b), 1 - 1 / 3)
    empty = FeatureVector(d=5, indices=())
    assert jaccard_distance(empty, empty) == 0.0
    assert jaccard_distance(a, a) == 0.0


def test_mixed_representations_rejected():
    with pytest.raises(ValueError):
        k_center([FeatureVector(d=2, indices=(0,)), dense([1.0, 0.0])], 1)


def test_k_equals_n_returns_every_index():
    points = [dense([float(v)]) for v in (0, 1, 10)]
    assert sorted(k_center(points, 3)) == [0, 1, 2]


def test_line_example_greedy_choice():
    points = [dense([0.0]), dense([1.0]), dense([10.0])]
    chosen = k_center(points, 2, seed_index=0)
    assert chosen == [0, 2]
    assert kcenter_radius(points, chosen, euclidean_distance) == 1.0


def test_first_center_is_the_seed_and_indices_distinct():
    rng = np.random.default_rng(2)
    points = [dense(rng.normal(size=3)) for _ in range(12)]
    chosen = k_center(points, 5, seed_index=7)
    assert chosen[0] == 7
    assert len(set(chosen)) == 5


@pytest.mark.parametrize("representation", ["dense", "sparse"])
def test_greedy_is_within_twice_optimal(representation):
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(3, 13))
        k = int(rng.integers(1, 4))
        if representation == "dense":
            points = [dense(rng.normal(size=2)) for _ in range(n)]
            distance = euclidean_distance
        else:
            points = [
                FeatureVector(d=8, indices=tuple(sorted(rng.choice(8, size=rng.integers(1, 5), replace=False).tolist())))
                for _ in range(n)
            ]
            distance = jaccard_distance
        greedy = kcenter_radius(points, k_center(points, k, distance), distance)
        optimal = kcenter_optimal_radius(points, k, distance)
        assert greedy <= 2 * optimal + 1e-12


# ---------------------------------------------------------------------------
# strategy dispatch


def trained_model(rng, d):
    return SoftmaxModel(theta=rng.normal(size=(2, d + 1)))


def test_small_batch_returns_everything():
    strategy = SelectionStrategy(k=10)
    vectors = [dense([float(i)]) for i in range(7)]
    assert select_for_feedback(strategy, None, vectors, iteration=5) == list(range(7))


def test_first_iteration_is_pure_k_center_for_every_variant():
    rng = np.random.default_rng(4)
    vectors = [dense(rng.normal(size=3)) for _ in range(30)]
    model = trained_model(rng, 3)
    expected = k_center(vectors, 10, seed_index=0)
    for variant in Variant:
        strategy = SelectionStrategy(variant=variant, k=10)
        assert select_for_feedback(strategy, model, vectors, iteration=1) == expected
        assert select_for_feedback(strategy, None, vectors, iteration=3) == expected


def test_egl_only_takes_top_k_by_score():
    rng = np.random.default_rng(5)
    vectors = [dense(rng.normal(size=3)) for _ in range(25)]
    model = trained_model(rng, 3)
    picked = select_for_feedback(SelectionStrategy(variant=Variant.EGL_ONLY, k=10), model, vectors, 4)
    scores = [egl(model, v) for v in vectors]
    worst_picked = min(scores[i] for i in picked)
    best_left = max(s for i, s in enumerate(scores) if i not in picked)
    assert len(picked) == 10
    assert worst_picked >= best_left


def test_hybrid_selects_only_within_retained_half():
    rng = np.random.default_rng(6)
    vectors = [dense(rng.normal(size=4)) for _ in range(100)]
    model = trained_model(rng, 4)
    strategy = SelectionStrategy(variant=Variant.EGL_THEN_KCENTER, k=10)
    picked = select_for_feedback(strategy, model, vectors, 2)
    scores = np.array([egl(model, v) for v in vectors])
    retained = set(np.argsort(-scores, kind="stable")[:50].tolist())
    assert len(picked) == 10
    assert set(picked) <= retained


def test_phased_switches_variants_with_iteration():
    rng = np.random.default_rng(7)
    vectors = [dense(rng.normal(size=3)) for _ in range(40)]
    model = trained_model(rng, 3)
    phased = SelectionStrategy(variant=Variant.PHASED, k=10)
    explore = select_for_feedback(phased, model, vectors, iteration=5)
    assert explore == k_center(vectors, 10, seed_index=0)
    hybrid = select_for_feedback(phased, model, vectors, iteration=15)
    hybrid_direct = select_for_feedback(
        SelectionStrategy(variant=Variant.EGL_THEN_KCENTER, k=10), model, vectors, 15
    )
    assert hybrid == hybrid_direct
    exploit = select_for_feedback(phased, model, vectors, iteration=25)
    exploit_direct = select_for_feedback(
        SelectionStrategy(variant=Variant.EGL_ONLY, k=10), model, vectors, 25
    )
    assert exploit == exploit_direct


def test_selection_is_deterministic():
    rng = np.random.default_rng(8)
    vectors = [dense(rng.normal(size=3)) for _ in range(50)]
    model = trained_model(rng, 3)
    strategy = SelectionStrategy(k=10)
    first = select_for_feedback(strategy, model, vectors, 3)
    second = select_for_feedback(strategy, model, vectors, 3)
    assert first == second
