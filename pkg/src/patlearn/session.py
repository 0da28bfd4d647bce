"""The interactive loop: batch consumption, feedback solicitation (simulated
oracle or human), cumulative retraining, stopping, the fold-based evaluation
protocol, and the selection-strategy ablation harness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import embed, learner, miner, select
from .core import Dataset, FeatureVector, Kind, Pattern, pattern_contains, pattern_tokens, render_pattern
from .learner import SoftmaxModel, TrainingSet
from .miner import MiningConfig, PatternBatch, partition_batches
from .select import SelectionStrategy


class ContainmentBasis(str, Enum):
    PATTERN_FRACTION = "pattern"  # |tokens(p) ∩ F| / |tokens(p)|
    SET_FRACTION = "set"  # |tokens(p) ∩ F| / |F|


@dataclass(frozen=True)
class OracleSpec:
    """Simulated rater: 'majority' rates by the dominating class label of the
    pattern's supporting transactions; 'features' rates 1 when the pattern
    shares at least `threshold` of its tokens (or of the feature set, per
    `basis`) with `feature_set`, else 2."""

    variant: str  # "majority" | "features"
    feature_set: frozenset = frozenset()
    threshold: float = 0.8
    basis: ContainmentBasis = ContainmentBasis.PATTERN_FRACTION

    def __post_init__(self):
        if self.variant not in ("majority", "features"):
            raise ValueError("oracle variant must be 'majority' or 'features'")
        if self.variant == "features":
            if not self.feature_set:
                raise ValueError("feature-containment oracle needs a non-empty feature set")
            if not 0.0 < self.threshold <= 1.0:
                raise ValueError("threshold must lie in (0, 1]")


@dataclass(frozen=True)
class SessionConfig:
    class_count: int = 2
    k: int = 10
    batch_fraction: float = 0.02
    min_iterations: int = 10
    stop_threshold: float = 1e-4
    strategy: SelectionStrategy = SelectionStrategy()
    oracle: Optional[OracleSpec] = None  # None = human rater
    max_iterations: Optional[int] = None  # protocol cap, e.g. 10 iterations = 100 ratings
    folds: int = 5
    seed: int = 0
    lam: float = 1.0
    dim: int = 100
    interesting_class: int = 1
    embed_hyperparams: embed.Hyperparams = embed.Hyperparams()

    def __post_init__(self):
        if self.stop_threshold <= 0:
            raise ValueError("stop_threshold must be positive")
        if self.min_iterations < 1:
            raise ValueError("min_iterations must be at least 1")
        if self.class_count < 2:
            raise ValueError("need at least two rating classes")
        if not 1 <= self.interesting_class <= self.class_count:
            raise ValueError("interesting_class out of range")


class Status(str, Enum):
    RUNNING = "running"
    AWAITING_FEEDBACK = "awaiting_feedback"
    CONVERGED = "converged"
    EXHAUSTED = "exhausted"


@dataclass
class PendingSelection:
    iteration: int
    patterns: list
    vectors: list


@dataclass
class SessionState:
    config: SessionConfig
    model: SoftmaxModel
    iteration: int = 0
    feedback_log: list = field(default_factory=list)  # (Pattern, FeatureVector, rating)
    rated_ids: set = field(default_factory=set)
    status: Status = Status.RUNNING
    pending: Optional[PendingSelection] = None
    metrics_history: list = field(default_factory=list)  # per-iteration dicts
    model_trained: bool = False


# ---------------------------------------------------------------------------
# oracles


def oracle_rate(oracle: OracleSpec, pattern: Pattern, dataset: Dataset) -> int:
    if oracle.variant == "majority":
        if dataset.class_labels is None:
            raise ValueError("majority-class oracle needs a labeled dataset")
        if pattern.supporting_ids is not None:
            supporters = pattern.supporting_ids
        else:
            supporters = tuple(
                t.id for t in dataset.transactions if pattern_contains(pattern, t)
            )
        if not supporters:
            raise ValueError(f"pattern {pattern.id} has no supporting transactions to rate by")
        by_id = {t.id: i for i, t in enumerate(dataset.transactions)}
        counts = {}
        for tid in supporters:
            lab = dataset.class_labels[by_id[tid]]
            counts[lab] = counts.get(lab, 0) + 1
        best = max(counts.values())
        return min(lab for lab, n in counts.items() if n == best)
    tokens = pattern_tokens(pattern)
    if not tokens:
        return 2
    overlap = len(tokens & oracle.feature_set)
    basis = len(tokens) if oracle.basis == ContainmentBasis.PATTERN_FRACTION else len(oracle.feature_set)
    return 1 if overlap / basis >= oracle.threshold else 2


# ---------------------------------------------------------------------------
# featurization


class Featurizer:
    """Binds the embedding choice for a dataset: binary bag of items for sets,
    the trained language model otherwise."""

    def __init__(self, dataset: Dataset, dim: int = 100,
                 hyperparams: embed.Hyperparams = embed.Hyperparams(),
                 model: Optional[embed.EmbeddingModel] = None):
        self.dataset = dataset
        if dataset.kind == Kind.SET:
            self.model = None
            self.dim = len(dataset.item_universe)
        else:
            self.model = model or embed.train_embedding(embed.build_corpus(dataset), dim, hyperparams)
            self.dim = self.model.d
        self._cache = {}

    def vector(self, pattern: Pattern) -> FeatureVector:
        got = self._cache.get(pattern.id)
        if got is None:
            if self.dataset.kind == Kind.SET:
                got = embed.encode_set_pattern(pattern, self.dataset.item_universe)
            else:
                got = embed.infer_pattern_vector(self.model, pattern, self.dataset)
            self._cache[pattern.id] = got
        return got


# ---------------------------------------------------------------------------
# one iteration, split so a human rater can suspend the loop


def prepare_feedback(state: SessionState, batch: PatternBatch, featurizer: Featurizer) -> SessionState:
    """Embed the batch, pick <= k candidates, and suspend awaiting ratings."""
    if state.status != Status.RUNNING:
        raise ValueError(f"cannot start an iteration while {state.status.value}")
    fresh = [p for p in batch.patterns if p.id not in state.rated_ids]
    if not fresh:
        raise ValueError("batch contains no unrated patterns")
    vectors = [featurizer.vector(p) for p in fresh]
    model = state.model if state.model_trained else None
    picked = select.select_for_feedback(
        state.config.strategy, model, vectors, state.iteration + 1
    )
    state.iteration += 1
    state.pending = PendingSelection(
        iteration=state.iteration,
        patterns=[fresh[i] for i in picked],
        vectors=[vectors[i] for i in picked],
    )
    state.status = Status.AWAITING_FEEDBACK
    return state


def apply_feedback(state: SessionState, ratings) -> dict:
    """Fold the ratings in, retrain cumulatively (warm start), and test the
    stopping rule.  Returns the iteration summary."""
    if state.status != Status.AWAITING_FEEDBACK or state.pending is None:
        raise ValueError("no feedback is pending")
    pend = state.pending
    if len(ratings) != len(pend.patterns):
        raise ValueError(f"expected {len(pend.patterns)} ratings, got {len(ratings)}")
    c = state.config.class_count
    for r in ratings:
        if not 1 <= r <= c:
            raise ValueError(f"rating {r} outside 1..{c}")

    for pattern, vec, rating in zip(pend.patterns, pend.vectors, ratings):
        state.feedback_log.append((pattern, vec, rating))
        state.rated_ids.add(pattern.id)

    train_set = TrainingSet.from_examples((vec, r) for _, vec, r in state.feedback_log)
    new_model = learner.train(state.model, train_set)
    delta = float(np.linalg.norm(new_model.theta - state.model.theta))
    state.model = new_model
    state.model_trained = True
    state.pending = None

    if state.iteration >= state.config.min_iterations and delta < state.config.stop_threshold:
        state.status = Status.CONVERGED
    else:
        state.status = Status.RUNNING
    summary = {
        "iteration": state.iteration,
        "theta_delta": delta,
        "status": state.status.value,
        "feedback_count": len(state.feedback_log),
    }
    state.metrics_history.append(summary)
    return summary


def run_iteration(state: SessionState, batch: PatternBatch, rater: Callable,
                  featurizer: Featurizer) -> dict:
    """prepare + rate + apply in one step, for oracle or other in-process raters."""
    prepare_feedback(state, batch, featurizer)
    ratings = rater(state.pending.patterns)
    return apply_feedback(state, ratings)


# ---------------------------------------------------------------------------
# whole sessions


def split_folds(patterns, folds: int, seed: int):
    """Seeded shuffle into `folds` near-equal parts; fold 0 is held out for
    testing, the rest feed the interactive loop."""
    order = np.random.default_rng(seed).permutation(len(patterns))
    parts = [list() for _ in range(folds)]
    for i, idx in enumerate(order):
        parts[i % folds].append(patterns[idx])
    return parts[0], [p for part in parts[1:] for p in part]


def run_session(dataset: Dataset, patterns, config: SessionConfig,
                featurizer: Optional[Featurizer] = None) -> tuple:
    """Full oracle-rated protocol run.  Returns (final state, report dict).

    Patterns are split into `folds` folds by seed; batches come from the
    training folds; the loop stops on convergence or batch exhaustion.  The
    held-out fold supplies the metric curve and the final recommendation list,
    ranked by the probability of the configured interesting class.
    """
    if not patterns:
        raise ValueError("no patterns supplied")
    if config.oracle is None:
        raise ValueError("run_session needs an oracle; drive human sessions through the service")

    featurizer = featurizer or Featurizer(dataset, config.dim, config.embed_hyperparams)
    test_fold, training = split_folds(patterns, config.folds, config.seed)
    batches = partition_batches(
        training,
        MiningConfig(min_support=1, batch_fraction=config.batch_fraction, shuffle_seed=config.seed),
    )

    truths = [oracle_rate(config.oracle, p, dataset) for p in test_fold]
    test_matrix = (
        np.stack([featurizer.vector(p).to_dense() for p in test_fold]) if test_fold else None
    )

    state = SessionState(
        config=config,
        model=SoftmaxModel.zeros(config.class_count, featurizer.dim, lam=config.lam),
    )

    def rate_all(selected):
        return [oracle_rate(config.oracle, p, dataset) for p in selected]

    selected_per_iteration = []
    stop_reason = "batches_exhausted"
    for batch in batches:
        before = len(state.feedback_log)
        summary = run_iteration(state, batch, rate_all, featurizer)
        selected_per_iteration.append([p.id for p, _, _ in state.feedback_log[before:]])
        if test_matrix is not None:
            preds = learner.predict_matrix(state.model, test_matrix)
            summary["weighted_f_score"] = learner.weighted_f_score(preds, truths)
            summary["accuracy"] = float(np.mean(preds == np.asarray(truths)))
        if state.status == Status.CONVERGED:
            stop_reason = "converged"
            break
        if config.max_iterations is not None and state.iteration >= config.max_iterations:
            stop_reason = "iteration_cap"
            break
    if state.status == Status.RUNNING:
        state.status = Status.EXHAUSTED

    report = build_report(state, dataset, test_fold, test_matrix, truths, selected_per_iteration,
                          stop_reason)
    return state, report


def build_report(state: SessionState, dataset: Dataset, test_fold, test_matrix, truths,
                 selected_per_iteration=(), stop_reason=None) -> dict:
    config = state.config
    final = {}
    recommendations = []
    if test_matrix is not None and len(test_fold):
        probs = learner.predict_proba_matrix(state.model, test_matrix)
        preds = probs.argmax(axis=1) + 1
        final = {
            "weighted_f_score": learner.weighted_f_score(preds, truths),
            "accuracy": float(np.mean(preds == np.asarray(truths))),
        }
        want = config.interesting_class - 1
        ranked = sorted(
            (
                (float(probs[i, want]), p.id, render_pattern(p, dataset))
                for i, p in enumerate(test_fold)
                if preds[i] == config.interesting_class
            ),
            key=lambda rec: (-rec[0], rec[1]),
        )
        recommendations = [
            {"pattern_id": pid, "rendering": text, "probability": prob}
            for prob, pid, text in ranked
        ]
    return {
        "config": {
            "class_count": config.class_count,
            "k": config.k,
            "batch_fraction": config.batch_fraction,
            "min_iterations": config.min_iterations,
            "max_iterations": config.max_iterations,
            "stop_threshold": config.stop_threshold,
            "strategy": config.strategy.variant.value,
            "folds": config.folds,
            "seed": config.seed,
            "lambda": config.lam,
            "interesting_class": config.interesting_class,
            "oracle": config.oracle.variant if config.oracle else None,
        },
        "status": state.status.value,
        "stop_reason": stop_reason,
        "iterations": state.iteration,
        "feedback_count": len(state.feedback_log),
        "rated_pattern_ids": [p.id for p, _, _ in state.feedback_log],
        "selected_per_iteration": [list(ids) for ids in selected_per_iteration],
        "metric_curve": state.metrics_history,
        "final": final,
        "recommendations": recommendations,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def run_ablation(dataset: Dataset, patterns, config: SessionConfig, seeds,
                 variants=tuple(select.Variant)) -> dict:
    """Rerun the same session under each selection variant and seed; returns
    {variant: {"curves": [...], "finals": [...]}} for strategy comparisons."""
    featurizer = Featurizer(dataset, config.dim, config.embed_hyperparams)
    out = {}
    for variant in variants:
        curves, finals = [], []
        for seed in seeds:
            cfg = replace(
                config,
                seed=seed,
                strategy=replace(config.strategy, variant=variant),
            )
            _, report = run_session(dataset, patterns, cfg, featurizer=featurizer)
            curves.append([m.get("weighted_f_score") for m in report["metric_curve"]])
            finals.append(report["final"].get("weighted_f_score"))
        out[variant.value] = {"curves": curves, "finals": finals}
    return out


# ---------------------------------------------------------------------------
# baseline featurizers for the embedding comparison harness


def ngram_vocabulary(dataset: Dataset) -> list:
    """All 2-grams and 3-grams of the sequence corpus, first-appearance order."""
    if dataset.kind != Kind.SEQUENCE:
        raise ValueError("n-gram features apply to sequence datasets")
    seen = {}
    for t in dataset.transactions:
        seq = t.payload
        for n in (2, 3):
            for i in range(len(seq) - n + 1):
                gram = seq[i : i + n]
                if gram not in seen:
                    seen[gram] = len(seen)
    return [g for g, _ in sorted(seen.items(), key=lambda kv: kv[1])]


def ngram_features(pattern: Pattern, vocabulary) -> FeatureVector:
    """Binary presence vector of the pattern's 2/3-grams over the corpus vocabulary."""
    position = {g: i for i, g in enumerate(vocabulary)}
    seq = pattern.payload
    idx = set()
    for n in (2, 3):
        for i in range(len(seq) - n + 1):
            got = position.get(seq[i : i + n])
            if got is not None:
                idx.add(got)
    return FeatureVector(d=len(vocabulary), indices=tuple(sorted(idx)))


#: the fixed list of graph summary statistics used by the topology baseline
TOPOLOGY_METRICS = (
    "vertex_count", "edge_count", "density", "degree_max", "degree_mean",
    "degree_std", "diameter", "radius", "eccentricity_mean", "closeness_mean",
    "closeness_max", "betweenness_mean", "betweenness_max", "clustering_mean",
    "transitivity", "egonet_size_mean", "egonet_size_max", "egonet_edges_mean",
    "egonet_edges_max", "label_entropy",
)


def topology_features(pattern: Pattern) -> FeatureVector:
    """Dense vector of the 20 TOPOLOGY_METRICS graph measures."""
    import networkx as nx

    g = nx.Graph()
    for vid, lab in pattern.payload.vertices:
        g.add_node(vid, label=lab)
    for u, v, lab in pattern.payload.edges:
        g.add_edge(u, v)
    n = g.number_of_nodes()
    degrees = np.array([d for _, d in g.degree()], dtype=float)
    ecc = nx.eccentricity(g)
    closeness = np.array(list(nx.closeness_centrality(g).values()))
    betweenness = np.array(list(nx.betweenness_centrality(g).values()))
    ego_sizes = np.array([nx.ego_graph(g, v).number_of_nodes() for v in g], dtype=float)
    ego_edges = np.array([nx.ego_graph(g, v).number_of_edges() for v in g], dtype=float)
    labels = [lab for _, lab in pattern.payload.vertices]
    freqs = np.array([labels.count(x) for x in set(labels)], dtype=float) / n
    entropy = float(-(freqs * np.log(freqs)).sum())
    values = [
        float(n),
        float(g.number_of_edges()),
        float(nx.density(g)),
        float(degrees.max()),
        float(degrees.mean()),
        float(degrees.std()),
        float(max(ecc.values())),
        float(min(ecc.values())),
        float(np.mean(list(ecc.values()))),
        float(closeness.mean()),
        float(closeness.max()),
        float(betweenness.mean()),
        float(betweenness.max()),
        float(nx.average_clustering(g)),
        float(nx.transitivity(g)),
        float(ego_sizes.mean()),
        float(ego_sizes.max()),
        float(ego_edges.mean()),
        float(ego_edges.max()),
        entropy,
    ]
    return FeatureVector(d=len(TOPOLOGY_METRICS), values=np.array(values))
