"""HTTP+JSON review service: read models for the dashboard plus the agency
and committee decision entry points.

Session tokens map statically to actor ids; role enforcement happens in the
same workflow gates the CLI uses. Reads serve the current in-memory
snapshot; writes are serialized through one lock and persisted before the
response, so a follow-up read reflects the new state.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .compiler import CompileRefusedError, compile as compile_document, hazard_log_table
from .engine import ProcessEngine, RecordInvalidError
from .model import DecisionVerdict, Recommendation, RecordId
from .validation import ConfigurationError, check_traceability, trace_rows
from .workflow import BlockedReleaseError, RoleGateError, WorkflowError


class ReviewRequest(BaseModel):
    prototype: str
    stage: int
    recommendation: str
    notes: str = ""


class DecisionRequest(BaseModel):
    prototype: str
    stage: int
    verdict: str = "Granted"
    conditions: str = ""


def load_tokens(path: str | Path) -> dict[str, str]:
    """Static token -> actor-id map from a JSON object file."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ValueError(f"{path}: token file must map token strings to actor ids")
    return data


def _unprocessable(message: str) -> HTTPException:
    return HTTPException(status_code=422, detail=message)


def _parse_id(text: str) -> RecordId:
    try:
        return RecordId.parse(text)
    except ValueError as exc:
        raise _unprocessable(str(exc)) from None


def create_app(repo_root: str | Path, tokens: dict[str, str],
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="release-gate review service")
    engine = ProcessEngine.open(repo_root)
    write_lock = threading.Lock()

    def actor_for(authorization: str | None) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        actor = tokens.get(token)
        if actor is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return actor

    def prototype_row(prototype: RecordId) -> dict[str, Any]:
        for row in engine.overview()["prototypes"]:
            if row["prototype"] == str(prototype):
                return row
        raise HTTPException(status_code=404, detail=f"unknown prototype {prototype}")

    @app.get("/api/whoami")
    def whoami(authorization: str | None = Header(default=None)) -> dict[str, Any]:
        actor_id = actor_for(authorization)
        actor = engine.repo.actors.get(actor_id)
        return {"actor": actor_id,
                "role": actor.role.value if actor else None,
                "name": actor.name if actor else ""}

    @app.get("/api/prototypes")
    def prototypes() -> dict[str, Any]:
        overview = engine.overview()
        return {"prototypes": overview["prototypes"],
                "pending_mismatches": overview["pending_mismatches"]}

    @app.get("/api/readiness/{prototype}/{stage}")
    def readiness(prototype: str, stage: int) -> dict[str, Any]:
        rid = _parse_id(prototype)
        if engine.repo.find(rid) is None:
            raise HTTPException(status_code=404, detail=f"unknown prototype {rid}")
        try:
            return engine.readiness(rid, stage).to_json_dict()
        except ConfigurationError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/api/hazard-log")
    def hazard_log() -> dict[str, Any]:
        return hazard_log_table(engine.repo)

    @app.get("/api/traceability")
    def traceability() -> dict[str, Any]:
        return {
            "rows": trace_rows(engine.repo),
            "issues": [i.to_json_dict() for i in check_traceability(engine.repo)],
        }

    @app.get("/api/document/{prototype}/{stage}")
    def document(prototype: str, stage: int) -> dict[str, Any]:
        rid = _parse_id(prototype)
        if engine.repo.find(rid) is None:
            raise HTTPException(status_code=404, detail=f"unknown prototype {rid}")
        try:
            compiled = compile_document(engine.repo, engine.state, rid, stage)
        except CompileRefusedError as exc:
            raise HTTPException(status_code=409, detail={
                "message": "required modules are missing",
                "report": exc.report.to_json_dict(),
            }) from None
        except ConfigurationError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return compiled.to_json_dict()

    @app.get("/api/journal")
    def journal() -> dict[str, Any]:
        return {"events": [
            {"seq": e.seq, "actor": e.actor, "kind": e.kind.value,
             "payload": e.payload, "timestamp": e.timestamp}
            for e in engine.repo.journal
        ]}

    def gate_guard(exc: WorkflowError) -> HTTPException:
        if isinstance(exc, RoleGateError):
            return HTTPException(status_code=403, detail=str(exc))
        body: dict[str, Any] = {"message": str(exc)}
        if isinstance(exc, BlockedReleaseError):
            body["reasons"] = exc.reasons
            if exc.report is not None:
                body["report"] = exc.report.to_json_dict()
        return HTTPException(status_code=409, detail=body)

    @app.post("/api/reviews")
    def post_review(body: ReviewRequest,
                    authorization: str | None = Header(default=None)) -> dict[str, Any]:
        actor = actor_for(authorization)
        rid = _parse_id(body.prototype)
        try:
            recommendation = Recommendation(body.recommendation)
        except ValueError:
            raise _unprocessable(
                f"unknown recommendation {body.recommendation!r}") from None
        with write_lock:
            try:
                review = engine.add_review(actor, rid, body.stage,
                                           recommendation, body.notes)
            except RecordInvalidError as exc:
                raise _unprocessable(str(exc)) from None
            except WorkflowError as exc:
                raise gate_guard(exc) from None
            engine.save()
        return {"review": str(review.id),
                "event_seq": engine.state.last_seq,
                "prototype_state": prototype_row(rid)}

    @app.post("/api/decisions")
    def post_decision(body: DecisionRequest,
                      authorization: str | None = Header(default=None)) -> dict[str, Any]:
        actor = actor_for(authorization)
        rid = _parse_id(body.prototype)
        try:
            verdict = DecisionVerdict(body.verdict)
        except ValueError:
            raise _unprocessable(f"unknown verdict {body.verdict!r}") from None
        with write_lock:
            try:
                decision = engine.decide(actor, rid, body.stage, verdict,
                                         body.conditions)
            except RecordInvalidError as exc:
                raise _unprocessable(str(exc)) from None
            except WorkflowError as exc:
                raise gate_guard(exc) from None
            engine.save()
        return {"decision": str(decision.id),
                "verdict": decision.verdict.value,
                "granted": sorted(engine.state.granted_stages(rid)),
                "event_seq": engine.state.last_seq,
                "prototype_state": prototype_row(rid)}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="dashboard")

    return app
