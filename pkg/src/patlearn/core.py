"""Kind-polymorphic domain types: transactions, patterns, labels, feature vectors.

Everything here is immutable after construction and safe to share across
concurrent readers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np


class Kind(str, Enum):
    SET = "set"
    SEQUENCE = "sequence"
    GRAPH = "graph"


ItemSet = tuple  # strictly increasing token ids
EventSequence = tuple  # ordered token ids, repeats allowed


@dataclass(frozen=True)
class LabeledGraph:
    """Connected, undirected, labeled graph.

    vertices: tuple of (vertex_id, vertex_label)
    edges: tuple of (u, v, edge_label) with u < v, no self-loops, no duplicates
    """

    vertices: tuple
    edges: tuple

    def vertex_labels(self) -> dict:
        return {vid: lab for vid, lab in self.vertices}

    def adjacency(self) -> dict:
        """vertex id -> list of (neighbor id, edge label)."""
        adj = {vid: [] for vid, _ in self.vertices}
        for u, v, lab in self.edges:
            adj[u].append((v, lab))
            adj[v].append((u, lab))
        return adj

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = self.adjacency()
        start = self.vertices[0][0]
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.vertices)


Payload = Union[ItemSet, EventSequence, LabeledGraph]


@dataclass(frozen=True)
class Transaction:
    id: int
    payload: Payload


@dataclass(frozen=True)
class Dataset:
    """Transactions of one kind, optionally class-labeled.

    item_universe is the ordered list of token ids (first-appearance order when
    produced by the file readers); for graph datasets it holds every vertex and
    edge label in use.  token_names, when present, maps positions of
    item_universe back to the raw tokens of the source file for rendering.
    """

    kind: Kind
    transactions: tuple
    class_labels: Optional[tuple] = None
    item_universe: tuple = ()
    token_names: Optional[tuple] = None

    def __len__(self) -> int:
        return len(self.transactions)

    def name_of(self, token: int) -> str:
        if self.token_names is None:
            return str(token)
        try:
            pos = self.item_universe.index(token)
        except ValueError:
            return str(token)
        return self.token_names[pos]


@dataclass(frozen=True)
class Pattern:
    id: int
    kind: Kind
    payload: Payload
    support: int
    supporting_ids: Optional[tuple] = None


@dataclass(frozen=True)
class FeatureVector:
    """Metric embedding of a pattern.

    Exactly one of `indices` (sparse binary over d positions) or `values`
    (dense real d-vector) is set.
    """

    d: int
    indices: Optional[tuple] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.indices is None) == (self.values is None):
            raise ValueError("exactly one of indices/values must be given")
        if self.indices is not None:
            if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
                raise ValueError("sparse indices must be strictly increasing")
            if self.indices and (self.indices[-1] >= self.d or self.indices[0] < 0):
                raise ValueError("sparse index out of range")
        else:
            vals = np.asarray(self.values, dtype=np.float64)
            if vals.shape != (self.d,):
                raise ValueError(f"dense vector must have shape ({self.d},)")
            if not np.all(np.isfinite(vals)):
                raise ValueError("dense values must be finite")
            object.__setattr__(self, "values", vals)

    @property
    def is_sparse(self) -> bool:
        return self.indices is not None

    def to_dense(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        out = np.zeros(self.d)
        if self.indices:
            out[list(self.indices)] = 1.0
        return out


@dataclass(frozen=True)
class Feedback:
    pattern_id: int
    rating: int  # positive integer in {1..c}


# ---------------------------------------------------------------------------
# validation


def _validate_graph(g: LabeledGraph, tid) -> list:
    problems = []
    vids = [vid for vid, _ in g.vertices]
    if len(set(vids)) != len(vids):
        problems.append(f"duplicate vertex id in transaction {tid}")
    declared = set(vids)
    seen_edges = set()
    for u, v, lab in g.edges:
        if u == v:
            problems.append(f"self-loop in transaction {tid}")
        if not u < v:
            problems.append(f"edge endpoints not ordered (u<v) in transaction {tid}")
        if (u, v) in seen_edges:
            problems.append(f"duplicate edge ({u},{v}) in transaction {tid}")
        seen_edges.add((u, v))
        if u not in declared or v not in declared:
            problems.append(f"edge endpoint not a declared vertex in transaction {tid}")
    if not problems and not g.is_connected():
        problems.append(f"graph not connected in transaction {tid}")
    return problems


def validate_dataset(dataset: Dataset) -> list:
    """Return one violation description per broken invariant; [] when well-formed."""
    problems = []
    universe = set(dataset.item_universe)
    if dataset.class_labels is not None:
        if len(dataset.class_labels) != len(dataset.transactions):
            problems.append(
                "class_labels length %d does not match %d transactions"
                % (len(dataset.class_labels), len(dataset.transactions))
            )
        elif any(lab < 1 for lab in dataset.class_labels):
            problems.append("class labels must be positive integers")
    for t in dataset.transactions:
        if dataset.kind == Kind.SET:
            if not isinstance(t.payload, tuple):
                problems.append(f"transaction {t.id} payload is not an item tuple")
                continue
            if any(b <= a for a, b in zip(t.payload, t.payload[1:])):
                problems.append(f"items not strictly increasing in transaction {t.id}")
            missing = [i for i in t.payload if i not in universe]
            if missing:
                problems.append(f"token {missing[0]} of transaction {t.id} missing from universe")
        elif dataset.kind == Kind.SEQUENCE:
            if not isinstance(t.payload, tuple):
                problems.append(f"transaction {t.id} payload is not an event tuple")
                continue
            missing = [e for e in t.payload if e not in universe]
            if missing:
                problems.append(f"token {missing[0]} of transaction {t.id} missing from universe")
        else:
            if not isinstance(t.payload, LabeledGraph):
                problems.append(f"transaction {t.id} payload is not a graph")
                continue
            problems.extend(_validate_graph(t.payload, t.id))
            labels = [lab for _, lab in t.payload.vertices] + [lab for _, _, lab in t.payload.edges]
            missing = [x for x in labels if x not in universe]
            if missing:
                problems.append(f"token {missing[0]} of transaction {t.id} missing from universe")
    return problems


# ---------------------------------------------------------------------------
# containment


def _is_subsequence(pattern: tuple, seq: tuple) -> bool:
    """Order-preserving containment with gaps allowed."""
    it = iter(seq)
    return all(any(e == x for x in it) for e in pattern)


def _subgraph_isomorphic(p: LabeledGraph, g: LabeledGraph) -> bool:
    """Backtracking search for a label-preserving injective mapping of p into g.

    Pattern edges must exist in g with matching labels (edge-subgraph
    semantics); extra edges of g between mapped vertices are allowed.
    Candidates are pruned by vertex label and degree.
    """
    if len(p.vertices) > len(g.vertices) or len(p.edges) > len(g.edges):
        return False
    p_lab = p.vertex_labels()
    g_lab = g.vertex_labels()
    p_adj = p.adjacency()
    g_adj = g.adjacency()
    g_edge = {}
    for u, v, lab in g.edges:
        g_edge[(u, v)] = lab
        g_edge[(v, u)] = lab

    # order pattern vertices so each (after the first) touches a mapped one
    order = []
    placed = set()
    pending = sorted(p_lab)
    while pending:
        nxt = None
        for vid in pending:
            if not order or any(nb in placed for nb, _ in p_adj[vid]):
                nxt = vid
                break
        if nxt is None:  # disconnected pattern: start a new component
            nxt = pending[0]
        order.append(nxt)
        placed.add(nxt)
        pending.remove(nxt)

    candidates = {
        vid: [w for w in g_lab if g_lab[w] == p_lab[vid] and len(g_adj[w]) >= len(p_adj[vid])]
        for vid in order
    }

    mapping = {}
    used = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        vid = order[i]
        for w in candidates[vid]:
            if w in used:
                continue
            ok = True
            for nb, elab in p_adj[vid]:
                if nb in mapping and g_edge.get((w, mapping[nb])) != elab:
                    ok = False
                    break
            if ok:
                mapping[vid] = w
                used.add(w)
                if extend(i + 1):
                    return True
                del mapping[vid]
                used.remove(w)
        return False

    return extend(0)


def pattern_contains(pattern: Pattern, transaction: Transaction) -> bool:
    """True when the transaction supports the pattern.

    Set: subset test.  Sequence: gapped subsequence test.  Graph:
    label-respecting subgraph isomorphism.
    """
    if isinstance(pattern.payload, LabeledGraph) != isinstance(transaction.payload, LabeledGraph):
        raise ValueError("pattern/transaction kind mismatch")
    if pattern.kind == Kind.SET:
        if not isinstance(transaction.payload, tuple):
            raise ValueError("pattern/transaction kind mismatch")
        return set(pattern.payload) <= set(transaction.payload)
    if pattern.kind == Kind.SEQUENCE:
        if not isinstance(transaction.payload, tuple):
            raise ValueError("pattern/transaction kind mismatch")
        return _is_subsequence(pattern.payload, transaction.payload)
    return _subgraph_isomorphic(pattern.payload, transaction.payload)


def pattern_tokens(pattern: Pattern) -> frozenset:
    """Distinct tokens of a pattern: items, events, or graph labels."""
    if isinstance(pattern.payload, LabeledGraph):
        g = pattern.payload
        return frozenset(lab for _, lab in g.vertices) | frozenset(lab for _, _, lab in g.edges)
    return frozenset(pattern.payload)


def render_pattern(pattern: Pattern, dataset: Optional[Dataset] = None) -> str:
    """Human-readable rendering: sets as sorted names, sequences arrow-joined,
    graphs as a vertex/edge listing."""
    name = dataset.name_of if dataset is not None else str
    if pattern.kind == Kind.SET:
        names = sorted(
            (name(i) for i in pattern.payload),
            key=lambda s: (0, int(s)) if s.isdigit() else (1, s),
        )
        return "{" + ", ".join(names) + "}"
    if pattern.kind == Kind.SEQUENCE:
        return " -> ".join(name(e) for e in pattern.payload)
    g = pattern.payload
    verts = " ".join(f"{vid}:{name(lab)}" for vid, lab in g.vertices)
    edges = " ".join(f"({u})-{name(lab)}-({v})" for u, v, lab in g.edges)
    return f"vertices[{verts}] edges[{edges}]"


def graph_edge_list(pattern: Pattern, dataset: Optional[Dataset] = None) -> list:
    """Edge list a UI can draw: [{u, v, label, u_label, v_label}, ...]."""
    if not isinstance(pattern.payload, LabeledGraph):
        return []
    name = dataset.name_of if dataset is not None else str
    labs = pattern.payload.vertex_labels()
    return [
        {"u": u, "v": v, "label": name(lab), "u_label": name(labs[u]), "v_label": name(labs[v])}
        for u, v, lab in pattern.payload.edges
    ]
