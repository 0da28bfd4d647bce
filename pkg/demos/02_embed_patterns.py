"""
Pattern embeddings: binary bags, sentences, and dfs walks
=========================================================

Set patterns embed as sparse binary vectors.  Sequence and graph patterns go
through a small sentence-vector language model: sequences are sentences of
events; a graph becomes one depth-first edge walk per vertex.
"""

import numpy as np

from patlearn.core import Kind, LabeledGraph, Pattern
from patlearn.embed import (
    Hyperparams,
    WalkCorpus,
    encode_set_pattern,
    graph_to_walks,
    infer_sentence_vector,
    train_embedding,
)

# --- set patterns: bag of items over the dataset's item universe
universe = (0, 1, 2, 3)  # think A, B, C, E
ab = Pattern(id=0, kind=Kind.SET, payload=(0, 1), support=5)
ace = Pattern(id=1, kind=Kind.SET, payload=(0, 2, 3), support=3)
print("AB  ->", encode_set_pattern(ab, universe).to_dense())
print("ACE ->", encode_set_pattern(ace, universe).to_dense())

# --- graphs: one sentence per vertex, each walk covering every edge once
triangle_with_tail = LabeledGraph(
    vertices=((0, "C"), (1, "C"), (2, "N"), (3, "O")),
    edges=((0, 1, 1), (0, 2, 1), (1, 2, 2), (2, 3, 1)),
)
for start, walk in zip(sorted(v for v, _ in triangle_with_tail.vertices), graph_to_walks(triangle_with_tail)):
    print(f"walk from vertex {start}: {' '.join(walk)}")

# --- the language model: two disjoint-vocabulary topic clusters
rng = np.random.default_rng(1)
sentences = []
for cluster in ("finance", "biology"):
    vocab = [f"{cluster}{i}" for i in range(20)]
    for _ in range(50):
        sentences.append(tuple(rng.choice(vocab, size=int(rng.integers(6, 12))).tolist()))
corpus = WalkCorpus(sentences=tuple(sentences), origin=tuple((i,) for i in range(100)))

model = train_embedding(corpus, d=16, hyperparams=Hyperparams(seed=1))
print("\nepoch losses:", [round(x, 3) for x in model.epoch_losses])

# inferred sentence vectors land near their own cluster
vectors = [infer_sentence_vector(model, s)[0] for s in corpus.sentences]


def mean_cosine(pairs):
    out = []
    for i, j in pairs:
        a, b = vectors[i], vectors[j]
        out.append(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.mean(out))


same = [(i, j) for i in range(100) for j in range(i + 1, 100) if (i < 50) == (j < 50)]
cross = [(i, j) for i in range(100) for j in range(i + 1, 100) if (i < 50) != (j < 50)]
print(f"mean cosine within a topic:  {mean_cosine(same):+.3f}")
print(f"mean cosine across topics:   {mean_cosine(cross):+.3f}")
