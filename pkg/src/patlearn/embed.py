"""Pattern -> metric feature vectors.

Set patterns become sparse binary bag-of-items vectors.  Sequence and graph
patterns go through a small distributed-memory sentence-vector language model
trained once on the transaction corpus: sequences are sentences of event
tokens, graphs are broken into one depth-first edge walk per vertex.  At
inference the word matrices are frozen and a fresh sentence vector is fitted
by gradient steps.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .core import Dataset, FeatureVector, Kind, LabeledGraph, Pattern

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparams:
    negative_samples: int = 5
    epochs: int = 10
    window: int = 5
    initial_step_size: float = 0.025
    inference_steps: int = 50
    seed: int = 1

    def __post_init__(self):
        if self.epochs < 1 or self.window < 1 or self.inference_steps < 1:
            raise ValueError("epochs, window and inference_steps must be positive")
        if self.initial_step_size <= 0:
            raise ValueError("initial_step_size must be positive")


@dataclass(frozen=True)
class WalkCorpus:
    """Sentences plus their origin: (transaction id,) for sequences,
    (transaction id, start vertex) for graph walks."""

    sentences: tuple
    origin: tuple


# ---------------------------------------------------------------------------
# set patterns: binary bag of items


def encode_set_pattern(pattern: Pattern, item_universe) -> FeatureVector:
    """Sparse binary vector over |universe| positions, set exactly at the
    pattern's items."""
    position = {item: i for i, item in enumerate(item_universe)}
    idx = []
    for item in pattern.payload:
        if item not in position:
            raise ValueError(f"item {item!r} not in the item universe")
        idx.append(position[item])
    return FeatureVector(d=len(item_universe), indices=tuple(sorted(idx)))


# ---------------------------------------------------------------------------
# graph -> sentences


def dfs_walk(graph: LabeledGraph, origin, name=str) -> list:
    """Edge tokens of a depth-first traversal from `origin` covering every
    edge exactly once; backtracking over already-walked edges emits nothing.

    At each vertex the untraversed edge toward the smallest (vertex label,
    vertex id) neighbor is taken first.  Token for walking x->y over edge e is
    "lab(x)~lab(e)~lab(y)".
    """
    if not graph.is_connected():
        raise ValueError("dfs walk requires a connected graph")
    labels = graph.vertex_labels()
    adj = {vid: [] for vid in labels}
    for u, v, elab in graph.edges:
        adj[u].append((v, elab, (u, v)))
        adj[v].append((u, elab, (u, v)))
    for vid in adj:
        adj[vid].sort(key=lambda rec: (labels[rec[0]], rec[0]))

    walked = set()
    tokens = []
    stack = [origin]
    while stack:
        x = stack[-1]
        step = next((rec for rec in adj[x] if rec[2] not in walked), None)
        if step is None:
            stack.pop()
            continue
        y, elab, eid = step
        walked.add(eid)
        tokens.append(f"{name(labels[x])}~{name(elab)}~{name(labels[y])}")
        stack.append(y)
    return tokens


def graph_to_walks(graph: LabeledGraph, name=str) -> list:
    """One sentence per vertex, each the full-edge dfs walk from that vertex,
    in ascending vertex id order."""
    return [dfs_walk(graph, vid, name) for vid, _ in sorted(graph.vertices)]


def build_corpus(dataset: Dataset) -> WalkCorpus:
    """Transaction corpus for language-model training: one sentence per
    sequence transaction, one per (graph transaction, vertex)."""
    sentences, origin = [], []
    if dataset.kind == Kind.SEQUENCE:
        for t in dataset.transactions:
            sentences.append([dataset.name_of(e) for e in t.payload])
            origin.append((t.id,))
    elif dataset.kind == Kind.GRAPH:
        for t in dataset.transactions:
            verts = sorted(t.payload.vertices)
            for (vid, _), walk in zip(verts, graph_to_walks(t.payload, dataset.name_of)):
                sentences.append(walk)
                origin.append((t.id, vid))
    else:
        raise ValueError("set datasets use the binary encoder, not the language model")
    return WalkCorpus(sentences=tuple(tuple(s) for s in sentences), origin=tuple(origin))


# ---------------------------------------------------------------------------
# the language model


@dataclass(frozen=True)
class EmbeddingModel:
    vocabulary: dict  # token -> row
    word_vectors: np.ndarray  # |V| x d input vectors
    context_vectors: np.ndarray  # |V| x d output vectors
    d: int
    hyperparams: Hyperparams
    token_counts: np.ndarray
    epoch_losses: tuple = ()

    @property
    def noise_cdf(self) -> np.ndarray:
        weights = self.token_counts.astype(np.float64) ** 0.75
        return np.cumsum(weights / weights.sum())


def ns_loss_and_grads(paragraph, context_vectors, output_vectors, labels):
    """Loss and analytic gradients of one negative-sampling prediction.

    The hidden state is the mean of the paragraph vector and the context word
    vectors; output_vectors holds the target's and the sampled negatives'
    output rows, labels their 1/0 tags.  Returns (loss, d_paragraph,
    d_context, d_outputs) — plain gradients, no step size applied.
    """
    paragraph = np.asarray(paragraph, dtype=np.float64)
    ctx = np.asarray(context_vectors, dtype=np.float64)
    outs = np.asarray(output_vectors, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    count = 1 + len(ctx)
    h = (paragraph + ctx.sum(axis=0)) / count if len(ctx) else paragraph.copy()
    scores = outs @ h
    # softplus(-s) for positives, softplus(s) for negatives
    loss = float(np.sum(np.logaddexp(0.0, np.where(labels == 1.0, -scores, scores))))
    ds = expit(scores) - labels
    d_out = ds[:, None] * h[None, :]
    dh = ds @ outs
    d_par = dh / count
    d_ctx = np.repeat(dh[None, :] / count, len(ctx), axis=0)
    return loss, d_par, d_ctx, d_out


def _sample_negatives(rng, cdf, target, k):
    picks = []
    guard = 0
    while len(picks) < k and guard < 100 * (k + 1):
        cand = int(np.searchsorted(cdf, rng.random()))
        guard += 1
        if cand != target:
            picks.append(cand)
    return picks  # may come up short only in degenerate single-token vocabularies


def _train_sentence(token_rows, dvec, win, wout, cdf, hp, alpha, rng, update_words):
    # Descent steps follow the word2vec convention of applying the full
    # hidden-state gradient to every contributor of the mean (a per-vector
    # step-size boost of the contributor count over the plain gradient, which
    # ns_loss_and_grads still reports exactly).
    loss = 0.0
    predictions = 0
    for pos, target in enumerate(token_rows):
        ctx_rows = token_rows[max(0, pos - hp.window) : pos] + token_rows[pos + 1 : pos + 1 + hp.window]
        negs = _sample_negatives(rng, cdf, target, hp.negative_samples)
        out_rows = [target] + negs
        labels = np.zeros(len(out_rows))
        labels[0] = 1.0
        step_loss, d_par, d_ctx, d_out = ns_loss_and_grads(
            dvec, win[ctx_rows], wout[out_rows], labels
        )
        count = 1 + len(ctx_rows)
        dvec -= alpha * count * d_par
        if update_words:
            for row, grad in zip(ctx_rows, d_ctx):
                win[row] -= alpha * count * grad
            for row, grad in zip(out_rows, d_out):
                wout[row] -= alpha * grad
        loss += step_loss
        predictions += 1
    return loss, predictions


def train_embedding(corpus: WalkCorpus, d: int, hyperparams: Hyperparams = Hyperparams()) -> EmbeddingModel:
    """Train word and sentence vectors by per-position SGD with negative
    sampling; the step size decays linearly from initial_step_size to 1e-4 of
    it over the epochs.  All randomness comes from hyperparams.seed."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if not corpus.sentences or all(len(s) == 0 for s in corpus.sentences):
        raise ValueError("corpus is empty")

    vocabulary = {}
    for sent in corpus.sentences:
        for tok in sent:
            if tok not in vocabulary:
                vocabulary[tok] = len(vocabulary)
    counts = np.zeros(len(vocabulary), dtype=np.int64)
    rows_per_sentence = []
    for sent in corpus.sentences:
        rows = [vocabulary[t] for t in sent]
        rows_per_sentence.append(rows)
        for r in rows:
            counts[r] += 1

    hp = hyperparams
    rng = np.random.default_rng(hp.seed)
    win = (rng.random((len(vocabulary), d)) - 0.5) / d
    wout = np.zeros((len(vocabulary), d))
    dvecs = (rng.random((len(corpus.sentences), d)) - 0.5) / d
    cdf = np.cumsum((counts.astype(np.float64) ** 0.75) / (counts.astype(np.float64) ** 0.75).sum())

    alpha0 = hp.initial_step_size
    alpha_min = alpha0 * 1e-4
    total = hp.epochs * len(rows_per_sentence)
    processed = 0
    epoch_losses = []
    for _epoch in range(hp.epochs):
        epoch_loss = 0.0
        epoch_preds = 0
        for s, rows in enumerate(rows_per_sentence):
            alpha = alpha0 + (alpha_min - alpha0) * (processed / total)
            loss, preds = _train_sentence(rows, dvecs[s], win, wout, cdf, hp, alpha, rng, True)
            epoch_loss += loss
            epoch_preds += preds
            processed += 1
        epoch_losses.append(epoch_loss / max(1, epoch_preds))

    return EmbeddingModel(
        vocabulary=vocabulary,
        word_vectors=win,
        context_vectors=wout,
        d=d,
        hyperparams=hp,
        token_counts=counts,
        epoch_losses=tuple(epoch_losses),
    )


def _stable_seed(model_seed: int, tokens) -> int:
    digest = hashlib.blake2b(digest_size=8)
    digest.update(str(model_seed).encode())
    for t in tokens:
        digest.update(b"\x00" + str(t).encode())
    return int.from_bytes(digest.digest(), "little")


def infer_sentence_vector(model: EmbeddingModel, tokens) -> tuple:
    """Fit a fresh sentence vector to `tokens` with word matrices frozen.

    Unknown tokens are skipped.  Returns (vector, known_token_count); with no
    known tokens the vector is all zeros.  Deterministic per (model, tokens).
    """
    hp = model.hyperparams
    rows = [model.vocabulary[t] for t in tokens if t in model.vocabulary]
    if not rows:
        return np.zeros(model.d), 0
    rng = np.random.default_rng(_stable_seed(hp.seed, tokens))
    dvec = (rng.random(model.d) - 0.5) / model.d
    win = model.word_vectors
    wout = model.context_vectors
    cdf = model.noise_cdf
    alpha0 = hp.initial_step_size
    alpha_min = alpha0 * 1e-4
    for step in range(hp.inference_steps):
        alpha = alpha0 + (alpha_min - alpha0) * (step / hp.inference_steps)
        _train_sentence(rows, dvec, win, wout, cdf, hp, alpha, rng, False)
    return dvec, len(rows)


def pattern_sentence(pattern: Pattern, dataset: Dataset = None, random_start_seed=None) -> list:
    """The sentence a pattern is embedded through: the event tokens for a
    sequence; one dfs walk for a graph, from the lowest-id vertex unless a
    random-start seed is supplied."""
    name = dataset.name_of if dataset is not None else str
    if pattern.kind == Kind.SEQUENCE:
        return [name(e) for e in pattern.payload]
    if pattern.kind == Kind.GRAPH:
        vids = sorted(vid for vid, _ in pattern.payload.vertices)
        start = vids[0]
        if random_start_seed is not None:
            start = vids[np.random.default_rng(random_start_seed).integers(len(vids))]
        return dfs_walk(pattern.payload, start, name)
    raise ValueError("set patterns use the binary encoder, not the language model")


def infer_pattern_vector(model: EmbeddingModel, pattern: Pattern, dataset: Dataset = None,
                         random_start_seed=None) -> FeatureVector:
    """Dense d-vector for a sequence or graph pattern via the trained model."""
    if model.word_vectors is None:
        raise ValueError("embedding model is untrained")
    tokens = pattern_sentence(pattern, dataset, random_start_seed)
    vec, known = infer_sentence_vector(model, tokens)
    if known == 0:
        logger.warning("pattern %d: all tokens out of vocabulary, embedding as zero", pattern.id)
    return FeatureVector(d=model.d, values=vec)


# ---------------------------------------------------------------------------
# persistence

EMBED_FORMAT_VERSION = 1


def save_embedding(path, model: EmbeddingModel) -> None:
    tokens = sorted(model.vocabulary, key=model.vocabulary.get)
    hp = model.hyperparams
    np.savez(
        path,
        version=EMBED_FORMAT_VERSION,
        tokens=np.array(tokens),
        word_vectors=model.word_vectors,
        context_vectors=model.context_vectors,
        d=model.d,
        token_counts=model.token_counts,
        epoch_losses=np.array(model.epoch_losses),
        hp=np.array(
            [hp.negative_samples, hp.epochs, hp.window, hp.initial_step_size,
             hp.inference_steps, hp.seed]
        ),
    )


def load_embedding(path) -> EmbeddingModel:
    with np.load(path) as blob:
        if int(blob["version"]) != EMBED_FORMAT_VERSION:
            raise ValueError(f"unsupported embedding file version {blob['version']}")
        hp_raw = blob["hp"]
        hp = Hyperparams(
            negative_samples=int(hp_raw[0]),
            epochs=int(hp_raw[1]),
            window=int(hp_raw[2]),
            initial_step_size=float(hp_raw[3]),
            inference_steps=int(hp_raw[4]),
            seed=int(hp_raw[5]),
        )
        tokens = [str(t) for t in blob["tokens"]]
        return EmbeddingModel(
            vocabulary={t: i for i, t in enumerate(tokens)},
            word_vectors=blob["word_vectors"],
            context_vectors=blob["context_vectors"],
            d=int(blob["d"]),
            hyperparams=hp,
            token_counts=blob["token_counts"],
            epoch_losses=tuple(float(x) for x in blob["epoch_losses"]),
        )
