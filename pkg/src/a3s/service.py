"""HTTP annotation service: a human answers the engine's pairwise queries.

The engine runs on a worker thread and blocks inside the oracle whenever it
needs an answer; the service publishes that single pending query, accepts the
verdict over HTTP, and unblocks the engine. One question is outstanding per
session at any time. Answers are persisted through the engine's constraint
log before the engine advances, so a crashed session resumes by replay.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .constraints import Relation
from .data import Dataset
from .engine import Engine, SessionConfig, read_oracle_records
from .init import InitConfig
from .io import load_dataset
from .oracle import ReplayOracle

PROJECTION_BACKGROUND_LIMIT = 2000


class SessionCancelled(RuntimeError):
    pass


def pca_projection(features: np.ndarray) -> np.ndarray:
    """Deterministic 2-D projection for datasets without image assets."""
    centered = features - features.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2] if vt.shape[0] >= 2 else np.vstack([vt[0], vt[0]])
    # Sign convention: the largest-magnitude loading of each axis is positive.
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return centered @ comps.T


class HumanOracle:
    """Blocks the engine thread until the matching HTTP answer arrives."""

    def __init__(self, session: "LiveSession"):
        self.session = session

    def answer(self, s: int, t: int, context: str = "") -> Relation:
        sess = self.session
        with sess.cond:
            qid = sess.next_query_id
            sess.next_query_id += 1
            sess.pending = {
                "query_id": qid,
                "s": int(s),
                "t": int(t),
                "context": context,
                "progress": sess.progress_locked(),
                "display": sess.display_for(s, t),
            }
            sess.cond.notify_all()
            while qid not in sess.answers and not sess.cancelled:
                sess.cond.wait(timeout=0.25)
            sess.pending = None
            sess.cond.notify_all()
            if sess.cancelled:
                raise SessionCancelled("session cancelled")
            verdict = sess.answers[qid]
        return Relation.MUST if verdict == "must" else Relation.CANNOT


class LiveSession:
    """One engine run plus the bookkeeping the HTTP layer needs."""

    def __init__(self, session_id: str, dataset: Dataset, config: SessionConfig,
                 replay_records=None):
        self.id = session_id
        self.dataset = dataset
        self.config = config
        self.cond = threading.Condition()
        self.pending: dict | None = None
        self.answers: dict[int, str] = {}
        self.pair_index: dict[int, tuple[int, int]] = {}
        self.next_query_id = 0
        self.cancelled = False
        self.state = "running"
        self.error: str | None = None
        self.result = None
        self.projection = pca_projection(dataset.features)
        oracle = HumanOracle(self)
        if replay_records:
            oracle = ReplayOracle(replay_records, fallback=oracle)
        self.engine = Engine(dataset, config, oracle=oracle)
        self.thread = threading.Thread(target=self._run, daemon=True)

    def start(self):
        self.thread.start()

    def _run(self):
        try:
            self.result = self.engine.run()
            state = "finished"
        except SessionCancelled:
            state = "cancelled"
        except Exception as exc:  # surfaced through /status
            self.error = str(exc)
            state = "failed"
        with self.cond:
            self.state = state
            self.pending = None
            self.cond.notify_all()

    def cancel(self):
        with self.cond:
            self.cancelled = True
            self.cond.notify_all()
        self.thread.join(timeout=5)

    def pair_of(self, qid: int) -> tuple[int, int]:
        return self.pair_index[qid]

    def progress_locked(self) -> dict:
        engine = self.engine
        return {
            "queries_used": engine.session.used,
            "budget": engine.session.budget,
            "k": engine.clustering.k if engine.clustering is not None else None,
        }

    def display_for(self, s: int, t: int) -> dict:
        if self.dataset.assets is not None:
            return {"mode": "images",
                    "assets": [f"/session/{self.id}/asset/{s}",
                               f"/session/{self.id}/asset/{t}"]}
        coords = self.projection
        return {"mode": "scatter",
                "coords": [[float(coords[s, 0]), float(coords[s, 1])],
                           [float(coords[t, 0]), float(coords[t, 1])]]}

    def status(self) -> dict:
        engine = self.engine
        with self.cond:
            state = self.state
            error = self.error
        row = engine.metrics_rows[-1] if engine.metrics_rows else None
        histogram: dict[int, int] = {}
        if engine.clustering is not None:
            for size in engine.clustering.sizes.values():
                histogram[size] = histogram.get(size, 0) + 1
        return {
            "state": state,
            "error": error,
            "progress": self.progress_locked(),
            "metrics": row,
            "cluster_size_histogram": {str(k): v for k, v in sorted(histogram.items())},
        }

    def wait_for_pending(self, timeout: float) -> dict | None:
        deadline = timeout
        with self.cond:
            while self.pending is None and self.state == "running" and deadline > 0:
                step = min(deadline, 0.25)
                self.cond.wait(timeout=step)
                deadline -= step
            return dict(self.pending) if self.pending else None


class SessionManager:
    def __init__(self):
        self.sessions: dict[str, LiveSession] = {}
        self.lock = threading.Lock()

    def create(self, dataset: Dataset, config: SessionConfig,
               replay_records=None, session_id: str | None = None) -> LiveSession:
        session_id = session_id or uuid.uuid4().hex[:12]
        session = LiveSession(session_id, dataset, config, replay_records)
        with self.lock:
            self.sessions[session_id] = session
        session.start()
        return session

    def get(self, session_id: str) -> LiveSession:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    def remove(self, session_id: str) -> None:
        session = self.get(session_id)
        session.cancel()
        with self.lock:
            self.sessions.pop(session_id, None)


def _config_from_doc(doc: dict) -> SessionConfig:
    cfg = dict(doc.get("config", {}))
    if "init" in cfg and isinstance(cfg["init"], dict):
        cfg["init"] = InitConfig(**cfg["init"])
    cfg.setdefault("oracle_mode", "interactive")
    return SessionConfig(**cfg)


def create_app(manager: SessionManager | None = None,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="a3s annotation service")
    manager = manager or SessionManager()
    app.state.manager = manager

    @app.post("/session")
    async def create_session(request: Request):
        doc = await request.json()
        try:
            config = _config_from_doc(doc)
            dataset = load_dataset(doc["data"], doc.get("labels"),
                                   doc.get("assets"), doc.get("views"))
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad session config: {exc}")
        except OSError as exc:
            raise HTTPException(status_code=400, detail=f"cannot load dataset: {exc}")
        replay_records = None
        if doc.get("resume") and config.out_dir:
            log = Path(config.out_dir) / "constraints.log"
            if log.exists():
                replay_records = read_oracle_records(log)
        if config.out_dir:
            out = Path(config.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "session.json", "w") as f:
                json.dump({"data": doc["data"], "labels": doc.get("labels"),
                           "assets": doc.get("assets"), "views": doc.get("views"),
                           "config": config.to_dict()}, f, indent=2, sort_keys=True)
        session = manager.create(dataset, config, replay_records)
        return {"session_id": session.id}

    @app.get("/session/{session_id}/pending")
    def get_pending(session_id: str, wait: float = 0.0):
        session = manager.get(session_id)
        pending = session.wait_for_pending(min(wait, 30.0))
        return {"pending": pending, "state": session.state}

    @app.post("/session/{session_id}/answer")
    async def post_answer(session_id: str, request: Request):
        session = manager.get(session_id)
        doc = await request.json()
        qid = doc.get("query_id")
        verdict = doc.get("verdict")
        if not isinstance(qid, int) or verdict not in ("must", "cannot"):
            return JSONResponse(status_code=400, content={
                "detail": "answer needs integer query_id and verdict must|cannot"})
        with session.cond:
            previous = session.answers.get(qid)
            if previous is not None:
                if previous == verdict:
                    return {"accepted": True, "duplicate": True,
                            "progress": session.progress_locked()}
                s, t = session.pair_of(qid)
                existing = session.engine.constraints.query_state(s, t)
                return JSONResponse(status_code=422, content={
                    "detail": "verdict contradicts the recorded constraint state",
                    "pair": [s, t],
                    "existing": "must" if existing == Relation.MUST else "cannot",
                    "attempted": verdict,
                })
            if session.pending is None or session.pending["query_id"] != qid:
                return JSONResponse(status_code=409, content={
                    "detail": f"query {qid} is not pending"})
            s, t = session.pending["s"], session.pending["t"]
            known = session.engine.constraints.query_state(s, t)
            wanted = Relation.MUST if verdict == "must" else Relation.CANNOT
            if known != Relation.UNKNOWN and known != wanted:
                return JSONResponse(status_code=422, content={
                    "detail": "verdict contradicts an inferred constraint",
                    "pair": [s, t],
                    "existing": "must" if known == Relation.MUST else "cannot",
                    "attempted": verdict,
                })
            session.answers[qid] = verdict
            session.pair_index[qid] = (s, t)
            session.cond.notify_all()
            return {"accepted": True, "duplicate": False,
                    "progress": session.progress_locked()}

    @app.get("/session/{session_id}/status")
    def get_status(session_id: str):
        return manager.get(session_id).status()

    @app.get("/session/{session_id}/log")
    def get_log(session_id: str, tail: int = 50):
        session = manager.get(session_id)
        events = session.engine.runlog[-max(tail, 0):]
        return {"events": events}

    @app.get("/session/{session_id}/projection")
    def get_projection(session_id: str):
        session = manager.get(session_id)
        n = session.projection.shape[0]
        if n > PROJECTION_BACKGROUND_LIMIT:
            ids = np.linspace(0, n - 1, PROJECTION_BACKGROUND_LIMIT).astype(int)
        else:
            ids = np.arange(n)
        return {"sample_ids": [int(i) for i in ids],
                "points": [[float(x), float(y)] for x, y in session.projection[ids]]}

    @app.get("/session/{session_id}/asset/{sample_id}")
    def get_asset(session_id: str, sample_id: int):
        session = manager.get(session_id)
        assets = session.dataset.assets
        if assets is None or not 0 <= sample_id < len(assets):
            raise HTTPException(status_code=404, detail="no asset for sample")
        return FileResponse(assets[sample_id])

    @app.delete("/session/{session_id}")
    def delete_session(session_id: str):
        manager.remove(session_id)
        return {"deleted": session_id}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve_single_session(dataset: Dataset, config: SessionConfig, port: int = 8000,
                         host: str = "127.0.0.1"):
    """Host exactly one interactive session; returns when it finishes."""
    import uvicorn

    manager = SessionManager()
    app = create_app(manager)
    session = manager.create(dataset, config, session_id="main")
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port,
                                           log_level="warning"))

    def watch():
        session.thread.join()
        server.should_exit = True

    threading.Thread(target=watch, daemon=True).start()
    print(f"interactive session 'main' on http://{host}:{port}", flush=True)
    server.run()
    return session.result
