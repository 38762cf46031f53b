"""HTTP face of the refinement loop.

POST /intent translates an utterance and opens a session,
POST /intent/{id}/confirm turns operator confirmation or correction
into training data, POST /intent/{id}/deploy compiles the confirmed
program against the configured network model, GET /intent/{id} is a
read-only snapshot so clients can recover after a reload, and
GET /metrics exposes counters for dashboards and tests.  When a
static_dir is configured the app also serves the chat UI bundle.

Fine-tuning runs on a single worker thread so training jobs never
overlap; requests issued while a job runs are served by the last
completed weights.  Confirmed pairs are appended to the dataset file
before training starts, so a crash can lose at most an in-flight
weight update, never feedback.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .anonymize import UnboundToken
from .deploy import NetworkModel, UnresolvedId, compile_intent, default_network
from .extract import EmptyExtraction
from .lang import ParseError, parse_nile
from .pipeline import DEFAULT_INTENT_NAME, Refinement, RefinementEngine
from .translate import (
    MaxLengthExceeded,
    append_example,
    load_model,
    read_dataset,
    save_model,
)

log = logging.getLogger("nile.service")

AWAITING = "awaiting-confirmation"
CONFIRMED = "confirmed"
CORRECTED = "corrected"
DEPLOYED = "deployed"
FAILED = "failed"

_TRANSITIONS = {
    AWAITING: {CONFIRMED, CORRECTED},
    CONFIRMED: {DEPLOYED, FAILED},
    CORRECTED: {DEPLOYED, FAILED},
}

_GUIDANCE = (
    "No network entities recognized. Mention at least one middlebox, "
    "endpoint, traffic kind, or qos requirement, e.g. "
    "'add a firewall from the gateway to the database'."
)


@dataclass
class Session:
    id: str
    refinement: Refinement
    status: str = AWAITING
    corrected_nile: str | None = None

    def advance(self, status: str) -> None:
        if status not in _TRANSITIONS.get(self.status, set()):
            raise InvalidTransition(f"cannot go from {self.status} to {status}")
        self.status = status

    @property
    def final_nile(self) -> str:
        return self.corrected_nile or self.refinement.nile_text


class InvalidTransition(Exception):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    weights_path: str | None = None
    dataset_path: str | None = None
    network_path: str | None = None
    session_log_path: str | None = None
    train_on_feedback: bool = True
    intent_name: str = DEFAULT_INTENT_NAME
    static_dir: str | None = None

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        def flag(name: str, default: bool) -> bool:
            raw = os.environ.get(name)
            if raw is None:
                return default
            return raw.strip().lower() in ("1", "true", "yes", "on")

        return cls(
            host=os.environ.get("NILE_HOST", cls.host),
            port=int(os.environ.get("NILE_PORT", cls.port)),
            weights_path=os.environ.get("NILE_WEIGHTS"),
            dataset_path=os.environ.get("NILE_DATASET"),
            network_path=os.environ.get("NILE_NETWORK"),
            session_log_path=os.environ.get("NILE_SESSION_LOG"),
            train_on_feedback=flag("NILE_TRAIN_ON_FEEDBACK", True),
            intent_name=os.environ.get("NILE_INTENT_NAME", DEFAULT_INTENT_NAME),
            static_dir=os.environ.get("NILE_UI_DIR"),
        )


class TrainWorker:
    """Runs fine-tune jobs one at a time on a daemon thread."""

    def __init__(self, engine: RefinementEngine, on_done=None):
        self._engine = engine
        self._on_done = on_done
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(
            target=self._loop, name="nile-train", daemon=True
        )
        self._thread.start()

    def submit(self, example) -> None:
        self._queue.put(example)

    def wait_idle(self) -> None:
        """Block until every submitted job has finished; for tests."""
        self._queue.join()

    def _loop(self) -> None:
        while True:
            example = self._queue.get()
            try:
                self._engine.incorporate(example)
                if self._on_done is not None:
                    self._on_done()
            except Exception:
                log.exception("fine-tune job failed")
            finally:
                self._queue.task_done()


class IntentRequest(BaseModel):
    utterance: str


class ConfirmRequest(BaseModel):
    corrected_nile: str | None = None


def build_engine(config: ServiceConfig) -> RefinementEngine:
    if not config.weights_path:
        raise ValueError("weights_path is required to build the engine")
    model = load_model(config.weights_path)
    dataset = read_dataset(config.dataset_path) if config.dataset_path else []
    return RefinementEngine(model, dataset, intent_name=config.intent_name)


def create_app(
    engine: RefinementEngine | None = None,
    network: NetworkModel | None = None,
    config: ServiceConfig | None = None,
) -> FastAPI:
    config = config or ServiceConfig.from_env()
    if engine is None:
        engine = build_engine(config)
    if network is None:
        network = (
            NetworkModel.load(config.network_path)
            if config.network_path
            else default_network()
        )

    app = FastAPI(title="nile-intent", version="0.1.0")
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()

    def persist_weights() -> None:
        if config.weights_path:
            save_model(config.weights_path, engine.model)

    worker = TrainWorker(engine, on_done=persist_weights)

    app.state.engine = engine
    app.state.network = network
    app.state.worker = worker
    app.state.sessions = sessions

    def log_event(session: Session, event: str, **extra) -> None:
        if not config.session_log_path:
            return
        record = {
            "ts": time.time(),
            "session": session.id,
            "event": event,
            "status": session.status,
            **extra,
        }
        with open(config.session_log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    def get_session(session_id: str) -> Session:
        with sessions_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session: {session_id}")
        return session

    def entity_rows(refinement: Refinement) -> list[dict]:
        return [
            {"kind": e.kind.value, "value": e.value, "position": e.position}
            for e in refinement.entities
        ]

    @app.post("/intent")
    def post_intent(body: IntentRequest):
        utterance = body.utterance.strip()
        if not utterance:
            raise HTTPException(422, detail={
                "error": "empty-utterance", "guidance": _GUIDANCE,
            })
        try:
            refinement = engine.refine(utterance)
        except EmptyExtraction as err:
            raise HTTPException(422, detail={
                "error": "empty-extraction",
                "message": str(err),
                "guidance": _GUIDANCE,
            })
        except UnboundToken as err:
            log.error("translation emitted unbound token: %s", err)
            raise HTTPException(500, detail={
                "error": "unbound-token", "message": str(err),
            })
        except MaxLengthExceeded as err:
            log.error("translation did not terminate: %s", err)
            raise HTTPException(500, detail={
                "error": "no-eos", "message": str(err),
            })

        session = Session(id=uuid.uuid4().hex, refinement=refinement)
        with sessions_lock:
            sessions[session.id] = session
        log_event(session, "created", utterance=utterance)
        return {
            "session_id": session.id,
            "entities": entity_rows(refinement),
            "nile_text": refinement.nile_text,
            "warnings": list(refinement.warnings),
        }

    @app.get("/intent/{session_id}")
    def get_intent(session_id: str):
        session = get_session(session_id)
        refinement = session.refinement
        return {
            "session_id": session.id,
            "status": session.status,
            "utterance": refinement.utterance,
            "entities": entity_rows(refinement),
            "nile_text": refinement.nile_text,
            "corrected_nile": session.corrected_nile,
            "warnings": list(refinement.warnings),
        }

    @app.post("/intent/{session_id}/confirm")
    def post_confirm(session_id: str, body: ConfirmRequest | None = None):
        session = get_session(session_id)
        corrected = body.corrected_nile if body else None
        try:
            example, status = engine.feedback_example(
                session.refinement, corrected
            )
        except ParseError as err:
            raise HTTPException(400, detail={
                "error": "parse-error",
                "message": str(err),
                "line": err.line,
                "col": err.col,
            })
        with sessions_lock:
            try:
                session.advance(status)
            except InvalidTransition as err:
                raise HTTPException(409, detail=str(err))
            if status == CORRECTED:
                session.corrected_nile = corrected
        if config.dataset_path:
            append_example(config.dataset_path, example)
        if config.train_on_feedback:
            worker.submit(example)
        else:
            engine.record_feedback(example)
        log_event(session, "feedback")
        return {"status": session.status}

    @app.post("/intent/{session_id}/deploy")
    def post_deploy(session_id: str):
        session = get_session(session_id)
        if session.status not in (CONFIRMED, CORRECTED):
            raise HTTPException(
                409, detail=f"session is {session.status}; confirm first"
            )
        try:
            intent = parse_nile(session.final_nile)
            commands, report = compile_intent(intent, network)
        except ParseError as err:
            raise HTTPException(422, detail={
                "error": "parse-error", "message": str(err),
            })
        except UnresolvedId as err:
            raise HTTPException(422, detail={
                "error": "unresolved-id", "id": err.id, "message": str(err),
            })
        with sessions_lock:
            session.advance(DEPLOYED if report.deployable else FAILED)
        log_event(session, "deploy", deployable=report.deployable)
        return {
            "commands": [c.render() for c in commands],
            "conflicts": [
                {"severity": c.severity, "message": c.message, "clause": c.clause}
                for c in report.conflicts
            ],
            "deployable": report.deployable,
        }

    @app.get("/metrics")
    def get_metrics():
        return {
            "dataset_size": engine.dataset_size,
            "last_train_loss": engine.last_train_loss,
            "feedback_count": engine.feedback_count,
            "mean_r2_last_eval": engine.mean_r2_last_eval,
        }

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the API routes above keep precedence
        app.mount(
            "/", StaticFiles(directory=config.static_dir, html=True), name="ui"
        )

    return app


def run(config: ServiceConfig | None = None) -> None:
    import uvicorn

    config = config or ServiceConfig.from_env()
    app = create_app(config=config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
