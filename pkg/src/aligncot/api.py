"""HTTP API over the proofreading session engine (serves the annotator UI)."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .proofreading import (
    DuplicateSession,
    InvalidEdit,
    NotYetCorrect,
    PrefixUnchanged,
    ProofreadService,
    SessionClosed,
    UnknownQuestion,
    UnknownSession,
)

_STATUS_CODES = {
    UnknownSession: 404,
    UnknownQuestion: 404,
    DuplicateSession: 409,
    SessionClosed: 409,
    PrefixUnchanged: 400,
    InvalidEdit: 400,
    NotYetCorrect: 400,
}


class OpenSessionBody(BaseModel):
    question_id: str


class EditBody(BaseModel):
    edit_offset: int
    corrected_prefix: str


def _error(exc: Exception) -> HTTPException:
    code = _STATUS_CODES.get(type(exc), 500)
    return HTTPException(
        status_code=code, detail={"error": type(exc).__name__, "message": str(exc)}
    )


def create_app(service: ProofreadService) -> FastAPI:
    app = FastAPI(title="aligncot proofreading")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(service.store.sessions)}

    @app.get("/sessions")
    def list_sessions(status: str | None = None):
        return [s.to_dict() for s in service.store.list(status=status)]

    @app.post("/sessions")
    def open_session(body: OpenSessionBody):
        try:
            return service.open_session(body.question_id).to_dict()
        except (UnknownQuestion, DuplicateSession) as exc:
            raise _error(exc) from exc

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return service.store.get(session_id).to_dict()
        except UnknownSession as exc:
            raise _error(exc) from exc

    @app.post("/sessions/{session_id}/edits")
    def submit_edit(session_id: str, body: EditBody):
        try:
            service.apply_edit(session_id, body.edit_offset, body.corrected_prefix)
            return service.store.get(session_id).to_dict()
        except (UnknownSession, SessionClosed, PrefixUnchanged, InvalidEdit) as exc:
            raise _error(exc) from exc

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str):
        try:
            return service.accept(session_id).to_dict()
        except (UnknownSession, SessionClosed, NotYetCorrect) as exc:
            raise _error(exc) from exc

    @app.post("/sessions/{session_id}/abandon")
    def abandon(session_id: str):
        try:
            return service.abandon(session_id).to_dict()
        except (UnknownSession, SessionClosed) as exc:
            raise _error(exc) from exc

    return app
