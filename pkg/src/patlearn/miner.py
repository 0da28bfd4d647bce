"""Closed frequent pattern supply: a native closed-itemset miner, ingestion of
externally mined sequence/graph pattern files, and batch partitioning.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Kind, LabeledGraph, Pattern, Transaction, pattern_contains

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MiningConfig:
    min_support: int  # absolute transaction count
    batch_fraction: float = 0.02
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be a positive count")
        if not 0.0 < self.batch_fraction <= 1.0:
            raise ValueError("batch_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class PatternBatch:
    index: int
    patterns: tuple


# ---------------------------------------------------------------------------
# closed frequent itemset mining
#
# Depth-first enumeration with closure-by-intersection and prefix-preserving
# closure extension: a candidate extension item e of a closed set P is expanded
# only when the closure of P+{e} adds no item below e, which visits every
# closed set exactly once.  Column sums over the supporting submatrix give the
# closure and all extension supports in one pass.


def mine_closed_itemsets(dataset: Dataset, min_support: int) -> list:
    """All closed frequent itemsets of a set dataset, with supports and
    supporting transaction ids, sorted by (support desc, payload lex asc)."""
    if dataset.kind != Kind.SET:
        raise ValueError("mine_closed_itemsets requires a set dataset")
    if len(dataset.transactions) == 0:
        raise ValueError("cannot mine an empty dataset")
    if min_support < 1:
        raise ValueError("min_support must be positive")

    universe = list(dataset.item_universe)
    v = len(universe)
    pos = {item: j for j, item in enumerate(universe)}
    n = len(dataset.transactions)
    mat = np.zeros((n, v), dtype=np.uint8)
    tids = np.empty(n, dtype=np.int64)
    for row, t in enumerate(dataset.transactions):
        tids[row] = t.id
        if t.payload:
            mat[row, [pos[i] for i in t.payload]] = 1

    found = []  # (payload positions tuple, support, row indices)

    def grow(rows: np.ndarray, colsums: np.ndarray, closed: np.ndarray, core: int):
        support = len(rows)
        closed_positions = np.flatnonzero(closed)
        if closed_positions.size:
            found.append((closed_positions, support, rows))
        for e in range(core + 1, v):
            if closed[e] or colsums[e] < min_support:
                continue
            sub_rows = rows[mat[rows, e] == 1]
            sub_colsums = mat[sub_rows].sum(axis=0, dtype=np.int64)
            sub_closed = sub_colsums == len(sub_rows)
            if np.array_equal(sub_closed[:e], closed[:e]):  # prefix-preserving
                grow(sub_rows, sub_colsums, sub_closed, e)

    all_rows = np.arange(n, dtype=np.int64)
    colsums0 = mat.sum(axis=0, dtype=np.int64)
    if n >= min_support:
        grow(all_rows, colsums0, colsums0 == n, -1)

    found.sort(key=lambda rec: (-rec[1], tuple(universe[j] for j in rec[0])))
    return [
        Pattern(
            id=i,
            kind=Kind.SET,
            payload=tuple(universe[j] for j in positions),
            support=support,
            supporting_ids=tuple(int(t) for t in tids[rows]),
        )
        for i, (positions, support, rows) in enumerate(found)
    ]


# ---------------------------------------------------------------------------
# dataset files
#
# Itemset file: FIMI, one transaction per line of space-separated tokens,
# optional trailing "| <class>".  Sequence file: same envelope, order kept and
# repeats allowed.  Graph file: gSpan text, "t # <id> [<class>]" then v/e lines.


class _Interner:
    def __init__(self):
        self.ids = {}
        self.names = []

    def __call__(self, token: str) -> int:
        got = self.ids.get(token)
        if got is None:
            got = len(self.names)
            self.ids[token] = got
            self.names.append(token)
        return got


def _split_class(line: str):
    if "|" in line:
        body, _, lab = line.partition("|")
        return body, int(lab.strip())
    return line, None


def _finish(kind, transactions, labels, interner):
    class_labels = None
    if any(lab is not None for lab in labels):
        if any(lab is None for lab in labels):
            raise ValueError("either all transactions carry a class label or none do")
        class_labels = tuple(labels)
    return Dataset(
        kind=kind,
        transactions=tuple(transactions),
        class_labels=class_labels,
        item_universe=tuple(range(len(interner.names))),
        token_names=tuple(interner.names),
    )


def read_itemset_dataset(path) -> Dataset:
    interner = _Interner()
    transactions, labels = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            body, lab = _split_class(line)
            items = sorted({interner(tok) for tok in body.split()})
            transactions.append(Transaction(id=len(transactions), payload=tuple(items)))
            labels.append(lab)
    return _finish(Kind.SET, transactions, labels, interner)


def read_sequence_dataset(path) -> Dataset:
    interner = _Interner()
    transactions, labels = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            body, lab = _split_class(line)
            events = tuple(interner(tok) for tok in body.split())
            transactions.append(Transaction(id=len(transactions), payload=events))
            labels.append(lab)
    return _finish(Kind.SEQUENCE, transactions, labels, interner)


def _parse_graph_blocks(lines, interner, lineno_base=0):
    """Yield (graph_id, class_or_None, LabeledGraph) from gSpan-style lines."""
    gid = None
    klass = None
    vertices, edges = [], []

    def flush():
        if gid is None:
            return None
        return gid, klass, LabeledGraph(vertices=tuple(vertices), edges=tuple(edges))

    for offset, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        where = lineno_base + offset + 1
        if parts[0] == "t":
            done = flush()
            if done:
                yield done
            if len(parts) < 3 or parts[1] != "#":
                raise ValueError(f"line {where}: malformed graph header")
            gid = int(parts[2])
            klass = int(parts[3]) if len(parts) > 3 else None
            vertices, edges = [], []
        elif parts[0] == "v":
            if len(parts) != 3:
                raise ValueError(f"line {where}: malformed vertex line")
            vertices.append((int(parts[1]), interner(parts[2])))
        elif parts[0] == "e":
            if len(parts) != 4:
                raise ValueError(f"line {where}: malformed edge line")
            u, v = int(parts[1]), int(parts[2])
            edges.append((min(u, v), max(u, v), interner(parts[3])))
        else:
            raise ValueError(f"line {where}: unrecognized graph line {line!r}")
    done = flush()
    if done:
        yield done


def read_graph_dataset(path) -> Dataset:
    interner = _Interner()
    transactions, labels = [], []
    with open(path) as fh:
        for gid, klass, graph in _parse_graph_blocks(fh.read().splitlines(), interner):
            transactions.append(Transaction(id=gid, payload=graph))
            labels.append(klass)
    return _finish(Kind.GRAPH, transactions, labels, interner)


def read_dataset(path, kind: Kind) -> Dataset:
    readers = {
        Kind.SET: read_itemset_dataset,
        Kind.SEQUENCE: read_sequence_dataset,
        Kind.GRAPH: read_graph_dataset,
    }
    return readers[kind](path)


# ---------------------------------------------------------------------------
# pattern files (bridge to external sequence/graph miners)
#
# Itemset/sequence pattern line: "tok tok ... #SUP:<n>".  Graph pattern: a
# gSpan block whose last line is "#SUP:<n>".


SUPPORT_TAG = "#SUP:"


def _parse_support(text: str, lineno: int) -> int:
    try:
        sup = int(text)
    except ValueError:
        raise ValueError(f"line {lineno}: unreadable support {text!r}") from None
    if sup <= 0:
        raise ValueError(f"line {lineno}: non-positive support {sup}")
    return sup


def ingest_patterns(path, kind: Kind, dataset: Dataset) -> list:
    """Parse an external pattern file, mapping tokens through the dataset's
    vocabulary, and recompute supports against the dataset; any mismatch with
    the file's support is logged as a warning (external miners may count
    containment differently)."""
    if kind not in (Kind.SEQUENCE, Kind.GRAPH):
        raise ValueError("ingest_patterns handles sequence and graph kinds")
    if dataset.kind != kind:
        raise ValueError("dataset kind does not match requested kind")
    token_ids = {name: tok for tok, name in zip(dataset.item_universe, dataset.token_names or ())}

    def intern_known(name: str, lineno: int) -> int:
        if name not in token_ids:
            raise ValueError(f"line {lineno}: token {name!r} not present in the dataset")
        return token_ids[name]

    patterns = []
    with open(path) as fh:
        lines = fh.read().splitlines()

    if kind == Kind.SEQUENCE:
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line:
                continue
            if SUPPORT_TAG not in line:
                raise ValueError(f"line {lineno}: missing {SUPPORT_TAG} field")
            body, _, suptext = line.partition(SUPPORT_TAG)
            sup = _parse_support(suptext.strip(), lineno)
            events = tuple(intern_known(tok, lineno) for tok in body.split())
            if not events:
                raise ValueError(f"line {lineno}: empty pattern")
            patterns.append(
                Pattern(id=len(patterns), kind=kind, payload=events, support=sup)
            )
    else:
        block, block_start = [], 1
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line:
                continue
            if SUPPORT_TAG in line:
                # the tag may close the block on its own line or trail the last line
                prefix, _, suptext = line.partition(SUPPORT_TAG)
                if prefix.strip():
                    if not block:
                        block_start = lineno
                    block.append(prefix.strip())
                sup = _parse_support(suptext.strip(), lineno)
                interner = _Interner()
                parsed = list(_parse_graph_blocks(block, interner, lineno_base=block_start - 1))
                if len(parsed) != 1:
                    raise ValueError(f"line {lineno}: expected one graph block per support line")
                _, _, graph = parsed[0]
                relabeled = LabeledGraph(
                    vertices=tuple(
                        (vid, intern_known(interner.names[lab], lineno)) for vid, lab in graph.vertices
                    ),
                    edges=tuple(
                        (u, v, intern_known(interner.names[lab], lineno)) for u, v, lab in graph.edges
                    ),
                )
                patterns.append(
                    Pattern(id=len(patterns), kind=kind, payload=relabeled, support=sup)
                )
                block, block_start = [], lineno + 1
            else:
                if not block:
                    block_start = lineno
                block.append(line)
        if block:
            raise ValueError(f"line {len(lines)}: graph block without {SUPPORT_TAG} line")

    # recompute supports against the dataset
    verified = []
    for p in patterns:
        probe = Pattern(id=p.id, kind=p.kind, payload=p.payload, support=p.support)
        supporters = tuple(
            t.id for t in dataset.transactions if pattern_contains(probe, t)
        )
        if len(supporters) != p.support:
            logger.warning(
                "pattern %d: file support %d, recomputed %d", p.id, p.support, len(supporters)
            )
        verified.append(
            Pattern(
                id=p.id,
                kind=p.kind,
                payload=p.payload,
                support=len(supporters) if supporters else p.support,
                supporting_ids=supporters or None,
            )
        )
    return verified


def write_pattern_file(path, patterns, dataset: Dataset) -> None:
    """Inverse of ingest_patterns / companion output of the miner."""
    with open(path, "w") as fh:
        for p in patterns:
            if isinstance(p.payload, LabeledGraph):
                fh.write(f"t # {p.id}\n")
                for vid, lab in p.payload.vertices:
                    fh.write(f"v {vid} {dataset.name_of(lab)}\n")
                for u, v, lab in p.payload.edges:
                    fh.write(f"e {u} {v} {dataset.name_of(lab)}\n")
                fh.write(f"{SUPPORT_TAG}{p.support}\n")
            else:
                toks = " ".join(dataset.name_of(tok) for tok in p.payload)
                fh.write(f"{toks} {SUPPORT_TAG}{p.support}\n")


# ---------------------------------------------------------------------------
# batching


def partition_batches(patterns, config: MiningConfig) -> list:
    """Seeded shuffle, then consecutive batches of ceil(fraction * n); the last
    batch may be smaller.  Batches partition the input exactly."""
    n = len(patterns)
    if n == 0:
        raise ValueError("no patterns to batch")
    order = np.random.default_rng(config.shuffle_seed).permutation(n)
    size = math.ceil(config.batch_fraction * n)
    return [
        PatternBatch(index=b, patterns=tuple(patterns[i] for i in order[lo : lo + size]))
        for b, lo in enumerate(range(0, n, size))
    ]
