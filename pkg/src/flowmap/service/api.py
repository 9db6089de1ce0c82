"""HTTP JSON API under /api/v1, consumed by the browser frontend."""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..contracts.cryptolist import CryptoListError
from ..mapping.engine import MappingError
from .session import Session, SessionError, create_session, list_sessions, load_session

# One writer per session: mutations are serialized, reads are cheap enough
# to share the same lock without contention at workbench scale.
_locks: dict[str, threading.Lock] = {}
_locks_guard = threading.Lock()


def _lock_for(session_id: str) -> threading.Lock:
    with _locks_guard:
        return _locks.setdefault(session_id, threading.Lock())


class SessionRequest(BaseModel):
    corpus: str
    models: list[str]
    crypto: str | None = None
    sources: str | None = None
    sinks: str | None = None


class DecisionRequest(BaseModel):
    entryId: str
    decision: str  # accept | reject | tolerate


class ManualMappingRequest(BaseModel):
    dfdRef: str
    pmRef: str


class CryptoListRequest(BaseModel):
    text: str


def _error(status: int, code: str, message: str, detail: str | None = None):
    raise HTTPException(status_code=status, detail={
        "code": code, "message": message, "detail": detail,
    })


def _load(session_id: str) -> Session:
    try:
        return load_session(session_id)
    except SessionError as exc:
        _error(404, "session_not_found", str(exc))


def _session_meta(session: Session) -> dict:
    return {
        "id": session.id,
        "corpus": session.corpus_path,
        "models": sorted(session.models),
        "iteration": session.state.iteration,
        "createdAt": session.created_at,
        "updatedAt": session.updated_at,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="flowmap", version="1.0")

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail), "detail": None}
        return JSONResponse(status_code=exc.status_code, content=detail)

    api = "/api/v1"

    @app.get(f"{api}/sessions")
    def get_sessions():
        return {"sessions": list_sessions()}

    @app.post(f"{api}/sessions", status_code=201)
    def post_session(req: SessionRequest):
        try:
            session = create_session(
                req.corpus, req.models,
                crypto_path=req.crypto,
                sources_path=req.sources,
                sinks_path=req.sinks,
            )
        except (SessionError, CryptoListError, ValueError) as exc:
            _error(400, "invalid_input", str(exc))
        return _session_meta(session)

    @app.get(f"{api}/sessions/{{session_id}}")
    def get_session(session_id: str):
        return _session_meta(_load(session_id))

    @app.get(f"{api}/sessions/{{session_id}}/suggestions")
    def get_suggestions(session_id: str):
        session = _load(session_id)
        return {
            "iteration": session.state.iteration,
            "suggestions": session.suggestion_view(),
        }

    @app.post(f"{api}/sessions/{{session_id}}/decisions")
    def post_decision(session_id: str, req: DecisionRequest):
        with _lock_for(session_id):
            session = _load(session_id)
            try:
                session.apply_decision(req.entryId, req.decision)
            except MappingError as exc:
                _error(404, "entry_not_found", str(exc))
            except SessionError as exc:
                _error(400, "invalid_decision", str(exc))
            return {
                "iteration": session.state.iteration,
                "suggestions": session.suggestion_view(),
            }

    @app.post(f"{api}/sessions/{{session_id}}/mappings")
    def post_mapping(session_id: str, req: ManualMappingRequest):
        with _lock_for(session_id):
            session = _load(session_id)
            try:
                entry = session.apply_manual(req.dfdRef, req.pmRef)
            except MappingError as exc:
                _error(400, "illegal_mapping", str(exc))
            return {"entryId": entry.id, "suggestions": session.suggestion_view()}

    @app.post(f"{api}/sessions/{{session_id}}/iterate")
    def post_iterate(session_id: str):
        with _lock_for(session_id):
            session = _load(session_id)
            session.iterate()
            return {
                "iteration": session.state.iteration,
                "suggestions": session.suggestion_view(),
            }

    @app.post(f"{api}/sessions/{{session_id}}/checks/{{kind}}")
    def post_check(session_id: str, kind: str, mode: str | None = None):
        with _lock_for(session_id):
            session = _load(session_id)
            try:
                return session.run_check(kind, mode)
            except SessionError as exc:
                _error(400, "invalid_check", str(exc))
            except ValueError as exc:
                _error(400, "check_failed", str(exc))

    @app.get(f"{api}/sessions/{{session_id}}/violations")
    def get_violations(session_id: str):
        session = _load(session_id)
        report_path = session.path / "violations.json"
        if not report_path.exists():
            return {"kind": None, "violations": []}
        import json
        return json.loads(report_path.read_text())

    @app.put(f"{api}/sessions/{{session_id}}/crypto-list")
    def put_crypto_list(session_id: str, req: CryptoListRequest):
        with _lock_for(session_id):
            session = _load(session_id)
            try:
                session.set_crypto_list(req.text)
            except CryptoListError as exc:
                _error(400, "invalid_crypto_list", str(exc))
            return {"entries": [
                {"capability": e.capability.value, "pattern": e.pattern}
                for e in session.crypto_list.entries
            ]}

    return app
