"""HTTP+JSON front door for live sessions: create a session over a registered
dataset, fetch the pending feedback request, submit ratings, and read
recommendations and metrics.

Every session is one self-describing JSON document under <store>/sessions/;
each mutation is written atomically, so killing and restarting the process
between any two calls preserves observable behavior.  Per-session calls are
serialized by a process-local lock.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import embed, learner, session as sess
from .core import Dataset, Kind, LabeledGraph, Pattern, graph_edge_list, render_pattern
from .learner import SoftmaxModel
from .miner import MiningConfig, PatternBatch, ingest_patterns, mine_closed_itemsets, partition_batches, read_dataset
from .select import SelectionStrategy, Variant

DOC_VERSION = 1

request_log = logging.getLogger("patlearn.requests")


# ---------------------------------------------------------------------------
# (de)serialization helpers


def _payload_to_json(payload):
    if isinstance(payload, LabeledGraph):
        return {"vertices": [list(v) for v in payload.vertices],
                "edges": [list(e) for e in payload.edges]}
    return list(payload)


def _payload_from_json(kind: Kind, raw):
    if kind == Kind.GRAPH:
        return LabeledGraph(
            vertices=tuple(tuple(v) for v in raw["vertices"]),
            edges=tuple(tuple(e) for e in raw["edges"]),
        )
    return tuple(raw)


def _pattern_to_json(p: Pattern):
    return {
        "id": p.id,
        "payload": _payload_to_json(p.payload),
        "support": p.support,
        "supporting_ids": list(p.supporting_ids) if p.supporting_ids else None,
    }


def _pattern_from_json(kind: Kind, raw):
    return Pattern(
        id=raw["id"],
        kind=kind,
        payload=_payload_from_json(kind, raw["payload"]),
        support=raw["support"],
        supporting_ids=tuple(raw["supporting_ids"]) if raw["supporting_ids"] else None,
    )


def _vector_to_json(v):
    if v.is_sparse:
        return {"d": v.d, "indices": list(v.indices)}
    return {"d": v.d, "values": [float(x) for x in v.values]}


def _vector_from_json(raw):
    from .core import FeatureVector

    if "indices" in raw:
        return FeatureVector(d=raw["d"], indices=tuple(raw["indices"]))
    return FeatureVector(d=raw["d"], values=np.array(raw["values"]))


def _embedding_to_json(model: Optional[embed.EmbeddingModel]):
    if model is None:
        return None
    hp = model.hyperparams
    return {
        "tokens": sorted(model.vocabulary, key=model.vocabulary.get),
        "word_vectors": model.word_vectors.tolist(),
        "context_vectors": model.context_vectors.tolist(),
        "d": model.d,
        "token_counts": model.token_counts.tolist(),
        "epoch_losses": list(model.epoch_losses),
        "hyperparams": {
            "negative_samples": hp.negative_samples,
            "epochs": hp.epochs,
            "window": hp.window,
            "initial_step_size": hp.initial_step_size,
            "inference_steps": hp.inference_steps,
            "seed": hp.seed,
        },
    }


def _embedding_from_json(raw):
    if raw is None:
        return None
    return embed.EmbeddingModel(
        vocabulary={t: i for i, t in enumerate(raw["tokens"])},
        word_vectors=np.array(raw["word_vectors"]),
        context_vectors=np.array(raw["context_vectors"]),
        d=raw["d"],
        hyperparams=embed.Hyperparams(**raw["hyperparams"]),
        token_counts=np.array(raw["token_counts"], dtype=np.int64),
        epoch_losses=tuple(raw["epoch_losses"]),
    )


# ---------------------------------------------------------------------------
# request bodies


class OracleBody(BaseModel):
    variant: str
    feature_tokens: list[str] = []
    threshold: float = 0.8
    basis: str = "pattern"


class ConfigBody(BaseModel):
    class_count: int = 2
    k: int = 10
    batch_fraction: float = 0.02
    min_iterations: int = 10
    stop_threshold: float = 1e-4
    strategy: str = "hybrid"
    folds: int = 5
    seed: int = 0
    lam: float = 1.0
    dim: int = 100
    interesting_class: int = 1
    oracle: Optional[OracleBody] = None
    rating_names: dict[int, str] = {}


class CreateSessionBody(BaseModel):
    dataset: str
    min_support: Optional[int] = None
    patterns: Optional[str] = None
    config: ConfigBody = ConfigBody()


class RatingItem(BaseModel):
    pattern_id: int
    rating: int


class RatingsBody(BaseModel):
    ratings: list[RatingItem]


class DatasetUpload(BaseModel):
    name: str
    kind: str
    role: str = "dataset"  # or "patterns"
    content: str


# ---------------------------------------------------------------------------
# the store


class SessionStore:
    def __init__(self, root):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        self._locks = {}
        self._registry_lock = threading.Lock()
        self._dataset_cache = {}

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    # datasets -------------------------------------------------------------
    def dataset_path(self, name: str) -> Path:
        return self.root / "datasets" / name

    def register_dataset(self, name: str, kind: str, role: str, content: str):
        if "/" in name or name.startswith("."):
            raise ValueError("dataset names must be plain file names")
        self.dataset_path(name).write_text(content)
        meta = {"kind": kind, "role": role}
        _atomic_write(self.dataset_path(name + ".meta.json"), json.dumps(meta))

    def dataset_meta(self, name: str) -> dict:
        meta_path = self.dataset_path(name + ".meta.json")
        if not meta_path.exists():
            raise KeyError(name)
        return json.loads(meta_path.read_text())

    def load_dataset(self, name: str) -> Dataset:
        path = self.dataset_path(name)
        if not path.exists():
            raise KeyError(name)
        stamp = path.stat().st_mtime_ns
        cached = self._dataset_cache.get(name)
        if cached and cached[0] == stamp:
            return cached[1]
        kind = Kind(self.dataset_meta(name)["kind"])
        data = read_dataset(path, kind)
        self._dataset_cache[name] = (stamp, data)
        return data

    def list_datasets(self) -> list:
        out = []
        for meta_path in sorted(self.root.glob("datasets/*.meta.json")):
            name = meta_path.name[: -len(".meta.json")]
            out.append({"name": name, **json.loads(meta_path.read_text())})
        return out

    # sessions -------------------------------------------------------------
    def session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.json"

    def save_doc(self, doc: dict):
        doc["updated"] = time.time()
        _atomic_write(self.session_path(doc["session_id"]), json.dumps(doc))

    def load_doc(self, session_id: str) -> dict:
        path = self.session_path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        return json.loads(path.read_text())


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# live session wrapper: document <-> runtime state


class LiveSession:
    def __init__(self, store: SessionStore, doc: dict):
        self.store = store
        self.doc = doc
        self.kind = Kind(doc["kind"])
        self.dataset = store.load_dataset(doc["dataset_ref"])
        self.patterns = {
            raw["id"]: _pattern_from_json(self.kind, raw) for raw in doc["patterns"]
        }
        cfg = doc["config"]
        self.config = sess.SessionConfig(
            class_count=cfg["class_count"],
            k=cfg["k"],
            batch_fraction=cfg["batch_fraction"],
            min_iterations=cfg["min_iterations"],
            stop_threshold=cfg["stop_threshold"],
            strategy=SelectionStrategy(variant=Variant(cfg["strategy"]), k=cfg["k"]),
            oracle=self._oracle_from(cfg.get("oracle")),
            folds=cfg["folds"],
            seed=cfg["seed"],
            lam=cfg["lam"],
            dim=cfg["dim"],
            interesting_class=cfg["interesting_class"],
        )
        self.embedding = _embedding_from_json(doc.get("embedding"))
        self.featurizer = sess.Featurizer(self.dataset, self.config.dim, model=self.embedding)
        raw_state = doc["state"]
        self.state = sess.SessionState(
            config=self.config,
            model=SoftmaxModel(theta=np.array(raw_state["theta"]), lam=self.config.lam),
            iteration=raw_state["iteration"],
            feedback_log=[
                (self.patterns[f["pattern_id"]], _vector_from_json(f["vector"]), f["rating"])
                for f in raw_state["feedback"]
            ],
            rated_ids=set(raw_state["rated_ids"]),
            status=sess.Status(raw_state["status"]),
            pending=self._pending_from(raw_state.get("pending")),
            metrics_history=list(raw_state["metrics_history"]),
            model_trained=raw_state["model_trained"],
        )

    @staticmethod
    def _oracle_from(raw):
        if raw is None:
            return None
        return sess.OracleSpec(
            variant=raw["variant"],
            feature_set=frozenset(raw["feature_set"]),
            threshold=raw["threshold"],
            basis=sess.ContainmentBasis(raw["basis"]),
        )

    def _pending_from(self, raw):
        if raw is None:
            return None
        return sess.PendingSelection(
            iteration=raw["iteration"],
            patterns=[self.patterns[pid] for pid in raw["pattern_ids"]],
            vectors=[_vector_from_json(v) for v in raw["vectors"]],
        )

    def flush(self):
        state = self.state
        self.doc["state"] = {
            "iteration": state.iteration,
            "status": state.status.value,
            "theta": state.model.theta.tolist(),
            "model_trained": state.model_trained,
            "rated_ids": sorted(state.rated_ids),
            "feedback": [
                {"pattern_id": p.id, "vector": _vector_to_json(v), "rating": r}
                for p, v, r in state.feedback_log
            ],
            "metrics_history": state.metrics_history,
            "pending": None
            if state.pending is None
            else {
                "iteration": state.pending.iteration,
                "pattern_ids": [p.id for p in state.pending.patterns],
                "vectors": [_vector_to_json(v) for v in state.pending.vectors],
            },
        }
        self.store.save_doc(self.doc)

    # loop control ----------------------------------------------------------
    def next_batch(self) -> Optional[PatternBatch]:
        cursor = self.doc["next_batch"]
        order = self.doc["batch_order"]
        while cursor < len(order):
            ids = [pid for pid in order[cursor] if pid not in self.state.rated_ids]
            cursor += 1
            if ids:
                self.doc["next_batch"] = cursor
                return PatternBatch(index=cursor - 1, patterns=tuple(self.patterns[p] for p in ids))
        self.doc["next_batch"] = cursor
        return None

    def feedback_request(self) -> dict:
        pend = self.state.pending
        names = self.doc.get("rating_names") or {}
        return {
            "session_id": self.doc["session_id"],
            "iteration": pend.iteration,
            "items": [
                {
                    "pattern_id": p.id,
                    "rendering": render_pattern(p, self.dataset),
                    "kind": self.kind.value,
                    "support": p.support,
                    "edges": graph_edge_list(p, self.dataset),
                }
                for p in pend.patterns
            ],
            "allowed_ratings": list(range(1, self.config.class_count + 1)),
            "rating_names": {int(k): v for k, v in names.items()},
            "status": self.state.status.value,
        }

    def record_heldout_metric(self, summary: dict):
        test_ids = self.doc.get("test_fold_ids") or []
        truths = self.doc.get("test_truths") or []
        if not test_ids:
            return
        X = np.stack([self.featurizer.vector(self.patterns[pid]).to_dense() for pid in test_ids])
        preds = learner.predict_matrix(self.state.model, X)
        summary["weighted_f_score"] = learner.weighted_f_score(preds, truths)
        summary["accuracy"] = float(np.mean(preds == np.asarray(truths)))


# ---------------------------------------------------------------------------
# app factory


def create_app(store_dir) -> FastAPI:
    store = SessionStore(store_dir)
    app = FastAPI(title="pattern feedback service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store

    @app.middleware("http")
    async def log_requests(request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        request_log.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "ms": round((time.perf_counter() - started) * 1000, 2),
                }
            )
        )
        return response

    def load_live(session_id: str) -> LiveSession:
        try:
            doc = store.load_doc(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return LiveSession(store, doc)

    @app.post("/datasets")
    def upload_dataset(body: DatasetUpload):
        if body.kind not in (k.value for k in Kind):
            raise HTTPException(status_code=400, detail=f"unknown kind {body.kind!r}")
        try:
            store.register_dataset(body.name, body.kind, body.role, body.content)
        except ValueError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return {"name": body.name, "kind": body.kind, "role": body.role}

    @app.get("/datasets")
    def list_datasets():
        return store.list_datasets()

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            dataset = store.load_dataset(body.dataset)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown dataset {body.dataset!r}")
        kind = dataset.kind
        cfg = body.config

        try:
            if kind == Kind.SET:
                if body.min_support is None:
                    raise ValueError("set datasets need min_support for the native miner")
                patterns = mine_closed_itemsets(dataset, body.min_support)
            else:
                if body.patterns is None:
                    raise ValueError("sequence/graph sessions need a registered pattern file")
                patterns = ingest_patterns(store.dataset_path(body.patterns), kind, dataset)
            if not patterns:
                raise ValueError("no patterns to learn from")

            oracle_doc = None
            oracle = None
            if cfg.oracle is not None:
                names = {n: t for t, n in zip(dataset.item_universe, dataset.token_names or ())}
                feature_ids = []
                for tok in cfg.oracle.feature_tokens:
                    if tok not in names:
                        raise ValueError(f"feature token {tok!r} not in the dataset")
                    feature_ids.append(names[tok])
                oracle = sess.OracleSpec(
                    variant=cfg.oracle.variant,
                    feature_set=frozenset(feature_ids),
                    threshold=cfg.oracle.threshold,
                    basis=sess.ContainmentBasis(cfg.oracle.basis),
                )
                oracle_doc = {
                    "variant": cfg.oracle.variant,
                    "feature_set": sorted(feature_ids),
                    "threshold": cfg.oracle.threshold,
                    "basis": cfg.oracle.basis,
                }

            config = sess.SessionConfig(
                class_count=cfg.class_count,
                k=cfg.k,
                batch_fraction=cfg.batch_fraction,
                min_iterations=cfg.min_iterations,
                stop_threshold=cfg.stop_threshold,
                strategy=SelectionStrategy(variant=Variant(cfg.strategy), k=cfg.k),
                oracle=oracle,
                folds=cfg.folds,
                seed=cfg.seed,
                lam=cfg.lam,
                dim=cfg.dim,
                interesting_class=cfg.interesting_class,
            )
        except ValueError as err:
            raise HTTPException(status_code=400, detail=str(err))

        embedding = None
        if kind != Kind.SET:
            embedding = embed.train_embedding(
                embed.build_corpus(dataset), cfg.dim, embed.Hyperparams(seed=cfg.seed)
            )
        featurizer = sess.Featurizer(dataset, cfg.dim, model=embedding)

        test_fold_ids, test_truths = [], []
        if oracle is not None:
            test_fold, training = sess.split_folds(patterns, config.folds, config.seed)
            test_fold_ids = [p.id for p in test_fold]
            test_truths = [sess.oracle_rate(oracle, p, dataset) for p in test_fold]
        else:
            training = list(patterns)

        batches = partition_batches(
            training,
            MiningConfig(min_support=1, batch_fraction=cfg.batch_fraction, shuffle_seed=cfg.seed),
        )

        session_id = uuid.uuid4().hex
        doc = {
            "version": DOC_VERSION,
            "session_id": session_id,
            "created": time.time(),
            "dataset_ref": body.dataset,
            "kind": kind.value,
            "config": {
                "class_count": cfg.class_count,
                "k": cfg.k,
                "batch_fraction": cfg.batch_fraction,
                "min_iterations": cfg.min_iterations,
                "stop_threshold": cfg.stop_threshold,
                "strategy": cfg.strategy,
                "oracle": oracle_doc,
                "folds": cfg.folds,
                "seed": cfg.seed,
                "lam": cfg.lam,
                "dim": cfg.dim,
                "interesting_class": cfg.interesting_class,
            },
            "rating_names": {str(k): v for k, v in cfg.rating_names.items()},
            "patterns": [_pattern_to_json(p) for p in patterns],
            "batch_order": [[p.id for p in b.patterns] for b in batches],
            "next_batch": 0,
            "test_fold_ids": test_fold_ids,
            "test_truths": test_truths,
            "embedding": _embedding_to_json(embedding),
            "state": {
                "iteration": 0,
                "status": sess.Status.RUNNING.value,
                "theta": SoftmaxModel.zeros(cfg.class_count, featurizer.dim, lam=cfg.lam).theta.tolist(),
                "model_trained": False,
                "rated_ids": [],
                "feedback": [],
                "metrics_history": [],
                "pending": None,
            },
        }
        store.save_doc(doc)
        return {"session_id": session_id, "patterns": len(patterns), "status": "running"}

    @app.get("/sessions/{session_id}/feedback")
    def next_feedback(session_id: str):
        with store.lock_for(session_id):
            live = load_live(session_id)
            state = live.state
            if state.status == sess.Status.AWAITING_FEEDBACK:
                return live.feedback_request()
            if state.status in (sess.Status.CONVERGED, sess.Status.EXHAUSTED):
                return {"session_id": session_id, "status": state.status.value, "items": []}
            batch = live.next_batch()
            if batch is None:
                state.status = sess.Status.EXHAUSTED
                live.flush()
                return {"session_id": session_id, "status": state.status.value, "items": []}
            sess.prepare_feedback(state, batch, live.featurizer)
            live.flush()
            return live.feedback_request()

    @app.post("/sessions/{session_id}/ratings")
    def submit_ratings(session_id: str, body: RatingsBody):
        with store.lock_for(session_id):
            live = load_live(session_id)
            state = live.state
            if state.status != sess.Status.AWAITING_FEEDBACK or state.pending is None:
                raise HTTPException(status_code=409, detail="session is not awaiting feedback")
            expected = [p.id for p in state.pending.patterns]
            got = {r.pattern_id: r.rating for r in body.ratings}
            missing = [pid for pid in expected if pid not in got]
            extra = [pid for pid in got if pid not in expected]
            if missing or extra or len(body.ratings) != len(expected):
                raise HTTPException(
                    status_code=400,
                    detail={"missing_pattern_ids": missing, "unexpected_pattern_ids": extra},
                )
            bad = [r.rating for r in body.ratings if not 1 <= r.rating <= live.config.class_count]
            if bad:
                raise HTTPException(
                    status_code=400,
                    detail=f"ratings {bad} outside 1..{live.config.class_count}",
                )
            summary = sess.apply_feedback(state, [got[pid] for pid in expected])
            live.record_heldout_metric(summary)
            live.flush()
            return summary

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(session_id: str, top_n: int = 10):
        with store.lock_for(session_id):
            live = load_live(session_id)
            if not live.state.model_trained:
                raise HTTPException(status_code=409, detail="session has no trained model yet")
            want = live.config.interesting_class - 1
            scored = []
            for pid, pattern in live.patterns.items():
                if pid in live.state.rated_ids:
                    continue
                proba = learner.predict_proba(live.state.model, live.featurizer.vector(pattern))
                scored.append((float(proba[want]), pid, pattern, int(proba.argmax()) + 1))
            scored.sort(key=lambda rec: (-rec[0], rec[1]))
            return {
                "session_id": session_id,
                "interesting_class": live.config.interesting_class,
                "items": [
                    {
                        "pattern_id": pid,
                        "rendering": render_pattern(pattern, live.dataset),
                        "predicted_class": pred,
                        "probability": prob,
                        "edges": graph_edge_list(pattern, live.dataset),
                    }
                    for prob, pid, pattern, pred in scored[: max(top_n, 0)]
                ],
            }

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str):
        with store.lock_for(session_id):
            live = load_live(session_id)
            return {
                "session_id": session_id,
                "status": live.state.status.value,
                "iteration": live.state.iteration,
                "feedback_count": len(live.state.feedback_log),
                "history": live.state.metrics_history,
            }

    return app


def serve(store_dir, port: int = 8000, host: str = "127.0.0.1"):
    import uvicorn

    port = int(os.environ.get("PATLEARN_PORT", port))
    uvicorn.run(create_app(store_dir), host=host, port=port, log_level="info")
