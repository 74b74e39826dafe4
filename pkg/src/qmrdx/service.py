"""HTTP/JSON facade over sessions for the browser UI and other clients.

One process serves one immutable network (swap the file and restart to
change it). Sessions live in memory; mutations on a session are
serialized by a per-session lock, so concurrent clients see a consistent
step sequence. The service adds nothing on top of the library's session
semantics: a scripted exchange replayed through the library gives
bit-identical results.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .exceptions import EvidenceError, QmrdxError, SessionStateError
from .inference import Evidence, top_k
from .inquiry import LookaheadConfig, UtilityKind
from .network import QmrNetwork
from .session import (
    Session,
    SessionConfig,
    SessionStatus,
    Suggest,
    replay_transcript,
)

FindingRef = Union[int, str]


class ConfigBody(BaseModel):
    max_steps: int = 20
    utility_threshold: float = 0.01
    depth: int = 1
    utility: str = "kl"
    top_k: int = 5

    def to_session_config(self) -> SessionConfig:
        return SessionConfig(
            max_steps=self.max_steps,
            utility_threshold=self.utility_threshold,
            lookahead=LookaheadConfig(depth=self.depth, utility_kind=UtilityKind(self.utility)),
            top_k=self.top_k,
        )


class EvidenceBody(BaseModel):
    positive: list[FindingRef] = Field(default_factory=list)
    negative: list[FindingRef] = Field(default_factory=list)


class CreateSessionBody(BaseModel):
    config: ConfigBody = Field(default_factory=ConfigBody)
    initial_evidence: EvidenceBody = Field(default_factory=EvidenceBody)


class AnswerBody(BaseModel):
    finding: FindingRef
    value: Optional[bool] = None  # null means "asked, unknown"


class OverrideBody(BaseModel):
    finding: FindingRef
    value: Optional[bool] = None  # null clears the finding


class ReplayBody(BaseModel):
    transcript: list[dict]


@dataclass
class SessionHandle:
    session_id: str
    session: Session
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(net: QmrNetwork, cors: bool = False, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="qmrdx session service")
    store: dict[str, SessionHandle] = {}
    store_lock = threading.Lock()

    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def resolve_finding(ref: FindingRef) -> int:
        if isinstance(ref, bool):
            raise HTTPException(422, "finding must be an id or a name")
        if isinstance(ref, int):
            if not 0 <= ref < net.n_findings:
                raise HTTPException(422, f"unknown finding id: {ref}")
            return ref
        try:
            return net.finding_id(str(ref).strip())
        except KeyError:
            raise HTTPException(422, f"unknown finding name: {ref!r}") from None

    def get_handle(session_id: str) -> SessionHandle:
        handle = store.get(session_id)
        if handle is None:
            raise HTTPException(404, f"unknown session: {session_id}")
        return handle

    def payload(handle: SessionHandle) -> dict:
        s = handle.session
        post = s.posterior()
        body = {
            "session_id": handle.session_id,
            "created_at": handle.created_at,
            "status": s.status.value,
            "step": s.step,
            "max_steps": s.config.max_steps,
            "utility_threshold": s.config.utility_threshold,
            "evidence": {
                "positive": [
                    {"id": i, "name": net.findings[i].name}
                    for i in sorted(s.evidence.positive)
                ],
                "negative": [
                    {"id": i, "name": net.findings[i].name}
                    for i in sorted(s.evidence.negative)
                ],
                "unknown": [
                    {"id": i, "name": net.findings[i].name}
                    for i in sorted(s.unknown)
                ],
            },
            "posterior": [
                {"id": d.id, "name": d.name, "prob": float(post.probs[d.id])}
                for d in net.diseases
            ],
            "top": [
                {"id": j, "name": net.diseases[j].name, "prob": p}
                for j, p in top_k(post, min(s.config.top_k, net.n_diseases))
            ],
            "degenerate": post.degenerate,
            "suggestion": None,
            "decision": None,
            "stop_reason": None,
            "diagnosis": None,
        }
        if s.status is SessionStatus.ACTIVE:
            decision = s.next_suggestion()
            if isinstance(decision, Suggest):
                body["decision"] = "suggest"
                body["suggestion"] = {
                    "finding_id": decision.finding_id,
                    "finding": net.findings[decision.finding_id].name,
                    "utility": decision.utility,
                }
            else:
                body["decision"] = "diagnose"
                body["stop_reason"] = decision.reason.value
        else:
            diagnosis = s.diagnosis
            body["decision"] = "done"
            body["stop_reason"] = diagnosis.reason.value
            body["diagnosis"] = {
                "ranked": [
                    {"id": j, "name": net.diseases[j].name, "prob": p}
                    for j, p in diagnosis.ranked
                ],
                "reason": diagnosis.reason.value,
                "steps": diagnosis.steps,
                "degenerate": diagnosis.posterior.degenerate,
            }
        return body

    @app.get("/network/findings")
    def network_findings():
        return [{"id": f.id, "name": f.name} for f in net.findings]

    @app.get("/network/diseases")
    def network_diseases():
        return [
            {"id": d.id, "name": d.name, "prior": d.prior} for d in net.diseases
        ]

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            evidence = Evidence(
                frozenset(resolve_finding(r) for r in body.initial_evidence.positive),
                frozenset(resolve_finding(r) for r in body.initial_evidence.negative),
            )
            session = Session(net, body.config.to_session_config(), evidence)
        except (EvidenceError, ValueError) as exc:
            raise HTTPException(422, str(exc)) from exc
        handle = SessionHandle(uuid.uuid4().hex, session)
        with store_lock:
            store[handle.session_id] = handle
        with handle.lock:
            return payload(handle)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        handle = get_handle(session_id)
        with handle.lock:
            return payload(handle)

    @app.post("/sessions/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody):
        handle = get_handle(session_id)
        finding = resolve_finding(body.finding)
        with handle.lock:
            try:
                handle.session.answer(finding, body.value)
            except SessionStateError as exc:
                raise HTTPException(409, str(exc)) from exc
            except EvidenceError as exc:
                raise HTTPException(409, str(exc)) from exc
            return payload(handle)

    @app.post("/sessions/{session_id}/override")
    def override(session_id: str, body: OverrideBody):
        handle = get_handle(session_id)
        finding = resolve_finding(body.finding)
        with handle.lock:
            try:
                handle.session.override(finding, body.value)
            except SessionStateError as exc:
                raise HTTPException(409, str(exc)) from exc
            except EvidenceError as exc:
                raise HTTPException(422, str(exc)) from exc
            return payload(handle)

    @app.post("/sessions/{session_id}/diagnose")
    def diagnose(session_id: str):
        handle = get_handle(session_id)
        with handle.lock:
            try:
                handle.session.finalize()
            except SessionStateError as exc:
                raise HTTPException(409, str(exc)) from exc
            return payload(handle)

    @app.get("/sessions/{session_id}/transcript", response_class=PlainTextResponse)
    def transcript(session_id: str):
        handle = get_handle(session_id)
        with handle.lock:
            return handle.session.transcript_jsonl()

    @app.post("/replay")
    def replay(body: ReplayBody):
        try:
            diagnosis = replay_transcript(net, body.transcript)
        except (QmrdxError, KeyError, ValueError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return {
            "ranked": [
                {"id": j, "name": net.diseases[j].name, "prob": p}
                for j, p in diagnosis.ranked
            ],
            "reason": diagnosis.reason.value,
            "steps": diagnosis.steps,
            "degenerate": diagnosis.posterior.degenerate,
        }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
