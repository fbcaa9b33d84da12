"""HTTP facade over architectures, operations, patterns and style checks.

Sessions are in-memory; each holds an architecture snapshot, an optional
pattern run, and a revision counter for optimistic concurrency.  The wire
format for architectures, operations and decisions is identical to the on-disk
format, so any exported document can be replayed headlessly.
"""

from __future__ import annotations

import itertools
import threading
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .cosa import base_type_graph, check_architecture, encode
from .evolution import EvolutionError, OperationDescriptor, apply_descriptor
from .graphs import materialize_derived
from .model import Architecture, ModelError
from .patterns import (
    BUILTIN_PATTERNS, Decision, DecisionError, DuplicateDecisionError,
    PatternExecutor,
)
from .styles import BUILTIN_STYLES, check_style


class Session:
    def __init__(self, sid: str, architecture: Architecture):
        self.id = sid
        self.architecture = architecture
        self.revision = 0
        self.executor: Optional[PatternExecutor] = None
        self.pattern_name: Optional[str] = None
        self.answered_steps: set[str] = set()
        self.lock = threading.Lock()


def _connects_to(a: Architecture) -> list[list[str]]:
    tg = base_type_graph()
    mat = materialize_derived(encode(a), tg)
    pairs = sorted({(e.src[2:], e.tgt[2:]) for e in mat.edges.values()
                    if e.type == "connectsTo"})
    return [list(p) for p in pairs]


def _run_state(s: Session) -> dict:
    ex = s.executor
    if ex is None:
        return {"state": "idle", "revision": s.revision}
    out = {
        "state": ex.state,
        "pattern": s.pattern_name,
        "trace": list(ex.trace),
        "revision": s.revision,
        "diagnostic": ex.diagnostic,
    }
    step = ex.current_step
    if isinstance(step, Decision):
        out["pendingDecision"] = {"step": step.id, "kind": step.kind,
                                  "prompt": step.prompt}
    if ex.final_report is not None:
        out["finalReport"] = ex.final_report.to_dict()
    return out


def create_app(allow_origin: str = "*") -> FastAPI:
    app = FastAPI(title="archevol", version="1")
    app.add_middleware(CORSMiddleware, allow_origins=[allow_origin],
                       allow_methods=["*"], allow_headers=["*"])

    sessions: dict[str, Session] = {}
    counter = itertools.count(1)

    def get_session(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid}")
        return sessions[sid]

    @app.post("/sessions", status_code=201)
    def create_session(doc: dict = Body(...)):
        try:
            a = Architecture.from_dict(doc)
        except (ModelError, KeyError, TypeError) as exc:
            raise HTTPException(400, f"malformed architecture: {exc}")
        probs = a.problems()
        if probs:
            raise HTTPException(400, "invalid architecture: " + "; ".join(probs))
        sid = f"s{next(counter)}"
        sessions[sid] = Session(sid, a)
        return {"sessionId": sid, "revision": 0}

    @app.get("/sessions/{sid}/architecture")
    def get_architecture(sid: str):
        s = get_session(sid)
        return {"architecture": s.architecture.to_dict(),
                "connectsTo": _connects_to(s.architecture),
                "revision": s.revision}

    @app.post("/sessions/{sid}/ops")
    def post_op(sid: str, body: dict = Body(...)):
        s = get_session(sid)
        with s.lock:
            if body.get("revision") != s.revision:
                raise HTTPException(
                    409, f"stale revision {body.get('revision')}, current {s.revision}")
            try:
                d = OperationDescriptor.from_dict(body)
            except (EvolutionError, KeyError, TypeError) as exc:
                raise HTTPException(400, f"malformed operation: {exc}")
            try:
                s.architecture = apply_descriptor(s.architecture, d)
            except (EvolutionError, ModelError) as exc:
                raise HTTPException(422, str(exc))
            s.revision += 1
            return {"architecture": s.architecture.to_dict(),
                    "revision": s.revision}

    @app.post("/sessions/{sid}/pattern/{name}/start")
    def start_pattern(sid: str, name: str):
        s = get_session(sid)
        if name not in BUILTIN_PATTERNS:
            raise HTTPException(404, f"unknown pattern {name}")
        with s.lock:
            s.executor = PatternExecutor(BUILTIN_PATTERNS[name](), s.architecture)
            s.pattern_name = name
            s.answered_steps = set()
            s.revision += 1
            return _run_state(s)

    @app.get("/sessions/{sid}/pattern/state")
    def pattern_state(sid: str):
        s = get_session(sid)
        if s.executor is None:
            raise HTTPException(404, "no pattern run in this session")
        return _run_state(s)

    @app.post("/sessions/{sid}/pattern/decision")
    def post_decision(sid: str, body: dict = Body(...)):
        s = get_session(sid)
        if s.executor is None:
            raise HTTPException(404, "no pattern run in this session")
        step_id = body.get("step")
        if not isinstance(step_id, str):
            raise HTTPException(400, "body must carry a step id")
        with s.lock:
            ex = s.executor
            if step_id in s.answered_steps:
                raise HTTPException(409, f"step {step_id} was already answered")
            step = ex.current_step
            if ex.state != "awaiting-decision" or not isinstance(step, Decision) \
                    or step.id != step_id:
                raise HTTPException(409, f"no decision pending for step {step_id}")
            try:
                step.validate(body.get("answer"), ex.architecture, ex.decisions)
            except DecisionError as exc:
                raise HTTPException(422, str(exc))
            try:
                ex.provide(step_id, body.get("answer"))
            except DuplicateDecisionError as exc:
                raise HTTPException(409, str(exc))
            s.answered_steps.add(step_id)
            s.revision += 1
            if ex.state == "finished":
                s.architecture = ex.architecture.copy()
                s.revision += 1
            return _run_state(s)

    @app.get("/sessions/{sid}/check")
    def check(sid: str, style: Optional[str] = Query(default=None)):
        s = get_session(sid)
        if style is None:
            return check_architecture(s.architecture).to_dict()
        if style not in BUILTIN_STYLES:
            raise HTTPException(404, f"unknown style {style}")
        return check_style(s.architecture, BUILTIN_STYLES[style]()).to_dict()

    @app.get("/styles")
    def styles():
        return {"styles": sorted(BUILTIN_STYLES)}

    @app.get("/patterns")
    def patterns():
        return {"patterns": sorted(BUILTIN_PATTERNS)}

    return app
