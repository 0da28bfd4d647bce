import numpy as np
import pytest

from patlearn.core import Dataset, FeatureVector, Kind, LabeledGraph, Pattern, Transaction
from patlearn.learner import SoftmaxModel
from patlearn.miner import MiningConfig, PatternBatch, mine_closed_itemsets, partition_batches
from patlearn.select import SelectionStrategy, Variant
from patlearn.session import (
    ContainmentBasis,
    Featurizer,
    OracleSpec,
    SessionConfig,
    SessionState,
    Status,
    apply_feedback,
    ngram_features,
    ngram_vocabulary,
    oracle_rate,
    prepare_feedback,
    report_to_json,
    run_iteration,
    run_session,
    split_folds,
    topology_features,
)

from .synthetic import separable_itemset_dataset


def set_pattern(items, pid=0, support=1, supporting=None):
    return Pattern(
        id=pid,
        kind=Kind.SET,
        payload=tuple(sorted(items)),
        support=support,
        supporting_ids=supporting,
    )


def labeled_dataset(itemsets, labels):
    universe = sorted({i for t in itemsets for i in t})
    return Dataset(
        kind=Kind.SET,
        transactions=tuple(Transaction(i, tuple(sorted(t))) for i, t in enumerate(itemsets)),
        class_labels=tuple(labels),
        item_universe=tuple(universe),
    )


# ---------------------------------------------------------------------------
# oracles


def test_majority_oracle_prefers_dominating_class():
    ds = labeled_dataset([{1, 2}, {1, 2}, {1, 2}, {1, 3}], [1, 1, 1, 2])
    assert oracle_rate(OracleSpec(variant="majority"), set_pattern({1, 2}), ds) == 1
    # item 1 is in all four: 3 class-1 vs 1 class-2
    assert oracle_rate(OracleSpec(variant="majority"), set_pattern({1}), ds) == 1


def test_majority_oracle_tie_goes_to_smallest_class():
    ds = labeled_dataset([{1}, {1}], [1, 2])
    assert oracle_rate(OracleSpec(variant="majority"), set_pattern({1}), ds) == 1


def test_majority_oracle_uses_supporting_ids_when_present():
    ds = labeled_dataset([{1}, {1}, {1}], [1, 2, 2])
    p = set_pattern({1}, supporting=(1, 2))  # pretend only transactions 1,2 support it
    assert oracle_rate(OracleSpec(variant="majority"), p, ds) == 2


def test_majority_oracle_rejects_unsupported_pattern():
    ds = labeled_dataset([{1}], [1])
    with pytest.raises(ValueError):
        oracle_rate(OracleSpec(variant="majority"), set_pattern({9}), ds)


def test_feature_containment_pattern_fraction():
    oracle = OracleSpec(variant="features", feature_set=frozenset({1, 2, 3, 4}), threshold=0.8)
    ds = labeled_dataset([{1}], [1])
    # 4 of 5 pattern items in the set: 0.8 -> interesting
    assert oracle_rate(oracle, set_pattern({1, 2, 3, 4, 9}), ds) == 1
    # 3 of 5: 0.6 -> not
    assert oracle_rate(oracle, set_pattern({1, 2, 3, 8, 9}), ds) == 2


def test_feature_containment_set_fraction_basis():
    oracle = OracleSpec(
        variant="features",
        feature_set=frozenset({1, 2, 3, 4}),
        threshold=0.5,
        basis=ContainmentBasis.SET_FRACTION,
    )
    ds = labeled_dataset([{1}], [1])
    # overlap 2 of the 4 feature-set tokens -> 0.5 -> interesting
    assert oracle_rate(oracle, set_pattern({1, 2, 9}), ds) == 1
    assert oracle_rate(oracle, set_pattern({1, 8, 9}), ds) == 2


def test_oracle_spec_validation():
    with pytest.raises(ValueError):
        OracleSpec(variant="features", feature_set=frozenset())
    with pytest.raises(ValueError):
        OracleSpec(variant="nope")


# ---------------------------------------------------------------------------
# iteration mechanics


def tiny_state(c=2, d=3, **cfg):
    config = SessionConfig(class_count=c, oracle=OracleSpec(variant="majority"), **cfg)
    return SessionState(config=config, model=SoftmaxModel.zeros(c, d, lam=config.lam))


def tiny_featurizer():
    ds = labeled_dataset([{0, 1, 2}], [1])
    return Featurizer(ds)


def test_feedback_log_grows_by_k_with_an_oracle():
    ds = separable_itemset_dataset(7)
    patterns = mine_closed_itemsets(ds, 6)
    featurizer = Featurizer(ds)
    config = SessionConfig(class_count=2, oracle=OracleSpec(variant="majority"), k=10)
    state = SessionState(config=config, model=SoftmaxModel.zeros(2, featurizer.dim))
    batch = PatternBatch(index=0, patterns=tuple(patterns[:40]))
    run_iteration(state, batch, lambda sel: [oracle_rate(config.oracle, p, ds) for p in sel], featurizer)
    assert len(state.feedback_log) == 10
    assert state.iteration == 1


def test_small_batch_rates_everything():
    ds = separable_itemset_dataset(7)
    patterns = mine_closed_itemsets(ds, 6)
    featurizer = Featurizer(ds)
    config = SessionConfig(class_count=2, oracle=OracleSpec(variant="majority"), k=10)
    state = SessionState(config=config, model=SoftmaxModel.zeros(2, featurizer.dim))
    batch = PatternBatch(index=0, patterns=tuple(patterns[:7]))
    run_iteration(state, batch, lambda sel: [1] * len(sel), featurizer)
    assert len(state.feedback_log) == 7


def test_no_convergence_below_min_iterations():
    state = tiny_state(min_iterations=10)
    featurizer = tiny_featurizer()
    batch = PatternBatch(index=0, patterns=(set_pattern({0, 1}, pid=1),))
    prepare_feedback(state, batch, featurizer)
    summary = apply_feedback(state, [1])
    assert summary["status"] == "running"  # huge theta change but iteration < 10 anyway
    assert state.status == Status.RUNNING


def test_converges_when_theta_stops_moving():
    state = tiny_state(min_iterations=2)
    featurizer = tiny_featurizer()
    # two batches with identical features and ratings: the second retraining
    # starts at the optimum of an equivalent objective
    first = PatternBatch(index=0, patterns=(set_pattern({0, 1}, pid=1), set_pattern({2}, pid=2)))
    prepare_feedback(state, first, featurizer)
    apply_feedback(state, [1, 2])
    second = PatternBatch(index=1, patterns=(set_pattern({0, 1}, pid=3), set_pattern({2}, pid=4)))
    prepare_feedback(state, second, featurizer)
    summary = apply_feedback(state, [1, 2])
    assert summary["theta_delta"] < 1e-4
    assert state.status == Status.CONVERGED


def test_out_of_range_rating_rejected():
    state = tiny_state()
    featurizer = tiny_featurizer()
    batch = PatternBatch(index=0, patterns=(set_pattern({0}, pid=1),))
    prepare_feedback(state, batch, featurizer)
    with pytest.raises(ValueError):
        apply_feedback(state, [5])


def test_rated_patterns_never_reappear():
    state = tiny_state(min_iterations=50)
    featurizer = tiny_featurizer()
    batch = PatternBatch(index=0, patterns=(set_pattern({0}, pid=1),))
    prepare_feedback(state, batch, featurizer)
    apply_feedback(state, [1])
    again = PatternBatch(index=1, patterns=(set_pattern({0}, pid=1),))
    with pytest.raises(ValueError, match="no unrated"):
        prepare_feedback(state, again, featurizer)
    ids = [p.id for p, _, _ in state.feedback_log]
    assert len(ids) == len(set(ids))


# ---------------------------------------------------------------------------
# whole sessions on the separable synthetic


SESSION_CONFIG = dict(
    class_count=2,
    oracle=OracleSpec(variant="majority"),
    batch_fraction=0.1,
    max_iterations=10,
    lam=0.01,
)


def test_session_reaches_high_f_score_with_100_ratings():
    ds = separable_itemset_dataset(7)
    patterns = mine_closed_itemsets(ds, 6)
    config = SessionConfig(seed=0, **SESSION_CONFIG)
    state, report = run_session(ds, patterns, config)
    assert report["feedback_count"] == 100
    assert report["iterations"] == 10
    assert report["final"]["weighted_f_score"] >= 0.9
    curve = [m["weighted_f_score"] for m in report["metric_curve"]]
    assert curve[-1] >= curve[0]


def test_session_reports_are_reproducible():
    ds = separable_itemset_dataset(7)
    patterns = mine_closed_itemsets(ds, 6)
    config = SessionConfig(seed=3, **SESSION_CONFIG)
    _, a = run_session(ds, patterns, config)
    _, b = run_session(ds, patterns, config)
    assert report_to_json(a) == report_to_json(b)


def test_recommendations_come_from_the_test_fold_sorted_by_probability():
    ds = separable_itemset_dataset(7)
    patterns = mine_closed_itemsets(ds, 6)
    config = SessionConfig(seed=1, **SESSION_CONFIG)
    _, report = run_session(ds, patterns, config)
    probs = [r["probability"] for r in report["recommendations"]]
    assert probs == sorted(probs, reverse=True)
    test_ids = {p.id for p in split_folds(patterns, config.folds, config.seed)[0]}
    assert all(r["pattern_id"] in test_ids for r in report["recommendations"])
    assert set(report["rated_pattern_ids"]).isdisjoint({r["pattern_id"] for r in report["recommendations"]})


def test_fold_split_partitions_patterns():
    patterns = [set_pattern({i % 5}, pid=i) for i in range(23)]
    test_fold, training = split_folds(patterns, 5, seed=9)
    assert len(test_fold) + len(training) == 23
    ids = sorted(p.id for p in test_fold) + sorted(p.id for p in training)
    assert sorted(ids) == list(range(23))


# ---------------------------------------------------------------------------
# baseline featurizers


def seq_dataset(sequences):
    universe = sorted({e for s in sequences for e in s})
    return Dataset(
        kind=Kind.SEQUENCE,
        transactions=tuple(Transaction(i, tuple(s)) for i, s in enumerate(sequences)),
        item_universe=tuple(universe),
    )


def test_ngram_featurizer_worked_example():
    ds = seq_dataset([(1, 2, 3), (1, 3)])
    vocab = ngram_vocabulary(ds)
    assert set(vocab) == {(1, 2), (2, 3), (1, 2, 3), (1, 3)}
    pattern = Pattern(id=0, kind=Kind.SEQUENCE, payload=(1, 2, 3), support=1)
    vec = ngram_features(pattern, vocab)
    on_bits = {vocab[i] for i in vec.indices}
    assert on_bits == {(1, 2), (2, 3), (1, 2, 3)}


def test_ngram_featurizer_disjoint_pattern_is_zero():
    ds = seq_dataset([(1, 2)])
    vocab = ngram_vocabulary(ds)
    pattern = Pattern(id=0, kind=Kind.SEQUENCE, payload=(8, 9), support=1)
    assert ngram_features(pattern, vocab).to_dense().sum() == 0


def test_topology_features_single_edge():
    g = LabeledGraph(vertices=((0, 1), (1, 1)), edges=((0, 1, 0),))
    pattern = Pattern(id=0, kind=Kind.GRAPH, payload=g, support=1)
    vec = topology_features(pattern).to_dense()
    from patlearn.session import TOPOLOGY_METRICS

    metrics = dict(zip(TOPOLOGY_METRICS, vec))
    assert metrics["diameter"] == 1.0
    assert metrics["degree_max"] == 1.0
    assert metrics["vertex_count"] == 2.0
    assert len(vec) == 20
    assert np.all(np.isfinite(vec))
