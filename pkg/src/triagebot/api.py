"""HTTP JSON boundary over the triage service.

Endpoints:
    POST /sessions                       start a conversation
    POST /sessions/{id}/messages         send an utterance
    GET  /sessions/{id}                  full transcript projection
    POST /tables/import                  import CSV or JSON (Content-Type decides)
    GET  /tables/active                  the active table as JSON
    GET  /reports/fallbacks?from&to      fallback report for a window
    POST /incidents                      open an incident
    POST /incidents/{id}/events          drive the lifecycle
    GET  /incidents/{id}                 incident projection

Every core error maps to exactly one (status, code) pair; bodies are
`{"code": ..., "message": ...}` on failure.
"""

from __future__ import annotations

import time
from datetime import datetime

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import errors
from .model import table_to_dict
from .service import TriageService

# One (status, code) pair per enumerated error; fuzzing the endpoints must
# never surface an unmapped 500 for these.
ERROR_MAP: dict[type, int] = {
    errors.FormatError: 400,
    errors.ActionGrammarError: 400,
    errors.InvalidWindow: 400,
    errors.ConfigError: 400,
    errors.UnknownSession: 404,
    errors.UnknownIncident: 404,
    errors.NoActiveTable: 409,
    errors.IllegalTransition: 409,
    errors.EmptyStore: 409,
    errors.ChannelUnavailable: 409,
    errors.SessionClosed: 410,
    errors.InvalidTable: 422,
    errors.UnknownType: 422,
    errors.UnknownIntention: 422,
    errors.UnknownCondition: 422,
    errors.TerminalNode: 422,
    errors.AnswersExhausted: 422,
    errors.StorageError: 500,
    errors.TriagebotError: 500,
}


def status_for(exc: errors.TriagebotError) -> int:
    for klass in type(exc).__mro__:
        if klass in ERROR_MAP:
            return ERROR_MAP[klass]
    return 500


class MessageBody(BaseModel):
    text: str


class SessionBody(BaseModel):
    incident_id: str | None = None


class IncidentBody(BaseModel):
    type: str
    description: str = ""


class IncidentEventBody(BaseModel):
    event: str
    actor: str | None = None


def create_app(service: TriageService) -> FastAPI:
    app = FastAPI(title="triagebot", docs_url=None, redoc_url=None)
    # The chat UI may be served from any static host; the API itself binds
    # loopback by default and carries no credentials.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(errors.TriagebotError)
    async def triagebot_error_handler(request: Request, exc: errors.TriagebotError):
        return JSONResponse(
            status_code=status_for(exc),
            content={"code": exc.code, "message": exc.message},
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody | None = None):
        incident_ref = body.incident_id if body else None
        session, prompt = service.create_session(incident_ref=incident_ref)
        return {"session_id": session.id, "prompt": prompt}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        result = service.post_message(session_id, body.text)
        return result.to_dict()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return service.engine.get_session(session_id).to_dict()

    @app.post("/tables/import")
    async def import_table(request: Request, response: Response):
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise errors.FormatError("body is not valid UTF-8") from None
        content_type = request.headers.get("content-type", "").split(";")[0].strip()
        fmt = {"text/csv": "csv", "application/json": "json"}.get(content_type)
        report = service.import_table(text, fmt)
        if not report.ok:
            response.status_code = 422
        payload = report.to_dict()
        if report.ok:
            payload["version"] = service.active_table().version
        return payload

    @app.get("/tables/active")
    def active_table():
        # Absence of the active table is resource absence here, not the
        # conflict POST /sessions reports.
        try:
            return table_to_dict(service.active_table())
        except errors.NoActiveTable as exc:
            return JSONResponse(
                status_code=404, content={"code": exc.code, "message": exc.message}
            )

    @app.get("/reports/fallbacks")
    def fallback_report(request: Request):
        params = request.query_params
        window_from = _parse_instant(params.get("from"), 0.0)
        window_to = _parse_instant(params.get("to"), time.time())
        return service.fallback_report(window_from, window_to).to_dict()

    @app.post("/incidents", status_code=201)
    def open_incident(body: IncidentBody):
        return service.incidents.open_incident(body.type, body.description).to_dict()

    @app.post("/incidents/{incident_id}/events")
    def incident_event(incident_id: str, body: IncidentEventBody):
        return service.incidents.transition(incident_id, body.event, body.actor).to_dict()

    @app.get("/incidents/{incident_id}")
    def get_incident(incident_id: str):
        return service.incidents.get(incident_id).to_dict()

    return app


def _parse_instant(value: str | None, default: float) -> float:
    if value is None or value == "":
        return default
    try:
        return float(value)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(value).timestamp()
    except ValueError:
        raise errors.InvalidWindow(f"cannot parse instant {value!r}") from None
