"""Mutation engine shared by the CLI and the review service.

Every gated action validates through the workflow state machine first,
appends exactly one journal event on success, and keeps the persisted
records in sync with the event-sourced state.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from . import store
from .compiler import ReleaseDocument, compile as compile_document, output_name, render
from .events import EventKind, PERMITTED_ROLE, WorkflowEvent
from .model import (
    CRD_TRANSPARENCY_FIELDS,
    DecisionVerdict,
    InvariantViolation,
    Recommendation,
    RecordId,
    RecordKind,
    ReleaseDecision,
    ReleaseStatus,
    ReviewRecord,
    validate_record,
)
from .store import Repository
from .validation import ConfigurationError, ReadinessReport, readiness_report
from .workflow import (
    RoleGateError,
    SequencingError,
    WorkflowState,
    apply_event,
    grant_stage,
    mark_stale,
    replay,
    require_developer_of,
    require_verified_coverage,
)


class RecordInvalidError(Exception):
    """A record fails its structural invariants (CLI exit code 1)."""

    def __init__(self, violations: list[InvariantViolation]):
        self.violations = violations
        super().__init__("invalid record:\n  " + "\n  ".join(str(v) for v in violations))


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ProcessEngine:
    """One repository, its replayed workflow state, and the gated mutations."""

    def __init__(self, repo: Repository, clock: Callable[[], str] | None = None):
        self.repo = repo
        self.clock = clock or _utc_now
        self.state: WorkflowState = replay(repo.journal, repo)

    @classmethod
    def open(cls, root: str | Path, clock: Callable[[], str] | None = None) -> "ProcessEngine":
        return cls(store.load(root), clock)

    def save(self) -> None:
        store.save(self.repo)

    # -- journal ------------------------------------------------------------

    def append(self, actor: str, kind: EventKind,
               payload: dict[str, Any]) -> WorkflowEvent:
        """Validate and append one event; state only advances if the gate holds."""
        event = WorkflowEvent(
            seq=len(self.repo.journal) + 1,
            actor=actor,
            kind=kind,
            payload=payload,
            timestamp=self.clock(),
        )
        self.state = apply_event(self.state, event, self.repo)
        self.repo.append_event(event)
        return event

    # -- component release lifecycle -----------------------------------------

    def _crd(self, crd_id: RecordId):
        crd = self.repo.find(crd_id)
        if crd is None:
            raise SequencingError(f"unknown component release document {crd_id}")
        return crd

    def submit_crd(self, actor: str, crd_id: RecordId) -> WorkflowEvent:
        crd = self._crd(crd_id)
        require_developer_of(actor, crd, self.repo, "ImplementationSubmitted")
        empty = [InvariantViolation(str(crd_id), name,
                                    f"transparency field {name} must be filled in"
                                    " before submission")
                 for name in CRD_TRANSPARENCY_FIELDS if not getattr(crd, name).strip()]
        if empty:
            raise RecordInvalidError(empty)
        event = self.append(actor, EventKind.IMPLEMENTATION_SUBMITTED,
                            {"crd": str(crd_id), "component": str(crd.component)})
        crd.release_status = ReleaseStatus.SUBMITTED
        crd.released_by = None
        return event

    def examine_crd(self, actor: str, crd_id: RecordId, notes: str = "") -> WorkflowEvent:
        self._crd(crd_id)
        payload: dict[str, Any] = {"crd": str(crd_id)}
        if notes:
            payload["notes"] = notes
        return self.append(actor, EventKind.DOCUMENTATION_EXAMINED, payload)

    def flag_mismatch(self, actor: str, crd_id: RecordId, notes: str = "") -> WorkflowEvent:
        crd = self._crd(crd_id)
        payload: dict[str, Any] = {"crd": str(crd_id)}
        if notes:
            payload["notes"] = notes
        event = self.append(actor, EventKind.MISMATCH_FOUND, payload)
        crd.release_status = ReleaseStatus.MISMATCH_FLAGGED
        return event

    def release_component(self, actor: str, crd_id: RecordId) -> WorkflowEvent:
        crd = self._crd(crd_id)
        require_developer_of(actor, crd, self.repo, "ComponentReleaseIssued")
        require_verified_coverage(crd)
        event = self.append(actor, EventKind.COMPONENT_RELEASE_ISSUED,
                            {"crd": str(crd_id), "component": str(crd.component)})
        crd.release_status = ReleaseStatus.RELEASED
        crd.released_by = actor
        crd.stale = False
        return event

    # -- review and decision --------------------------------------------------

    def _gate_actor(self, actor: str, kind: EventKind) -> None:
        """Same check apply_event runs; raised before any record is drafted."""
        record = self.repo.actors.get(actor)
        if record is None:
            raise RoleGateError(f"unknown actor {actor!r}")
        required = PERMITTED_ROLE[kind]
        if record.role is not required:
            raise RoleGateError(
                f"{kind.value} requires {required.value}, actor {actor!r}"
                f" has role {record.role.value}")

    def add_review(self, actor: str, prototype: RecordId, stage: int,
                   recommendation: Recommendation, notes: str = "") -> ReviewRecord:
        self._gate_actor(actor, EventKind.REVIEW_COMPLETED)
        review = ReviewRecord(
            id=RecordId(RecordKind.RVW, self.repo.next_serial(RecordKind.RVW)),
            prototype=prototype, stage=stage,
            recommendation=recommendation, notes=notes, reviewer=actor)
        violations = validate_record(review, self.repo)
        if violations:
            raise RecordInvalidError(violations)
        self.append(actor, EventKind.REVIEW_COMPLETED, {
            "review": str(review.id),
            "prototype": str(prototype),
            "stage": stage,
            "recommendation": recommendation.value,
        })
        self.repo.add(review)
        return review

    def decide(self, actor: str, prototype: RecordId, stage: int,
               verdict: DecisionVerdict, conditions: str = "") -> ReleaseDecision:
        self._gate_actor(actor, EventKind.RELEASE_DECIDED)
        decision = ReleaseDecision(
            id=RecordId(RecordKind.DEC, self.repo.next_serial(RecordKind.DEC)),
            prototype=prototype, stage=stage, verdict=verdict,
            conditions=conditions, decided_by=actor)
        violations = validate_record(decision, self.repo)
        if violations:
            raise RecordInvalidError(violations)
        if verdict is DecisionVerdict.GRANTED:
            # full decision-time gate including the readiness report
            grant_stage(self.state, decision, self.repo)
        self.append(actor, EventKind.RELEASE_DECIDED, {
            "decision": str(decision.id),
            "prototype": str(prototype),
            "stage": stage,
            "verdict": verdict.value,
            "conditions": conditions,
        })
        self.repo.add(decision)
        prototype_record = self.repo.find(prototype)
        prototype_record.granted_stages = self.state.granted_stages(prototype)
        return decision

    # -- compilation ------------------------------------------------------------

    def compile(self, actor: str, prototype: RecordId, stage: int,
                out_dir: str | Path | None = None,
                formats: tuple[str, ...] = ("Text", "JSON")) -> ReleaseDocument:
        document = compile_document(self.repo, self.state, prototype, stage)
        self.append(actor, EventKind.RELEASE_DOCUMENT_COMPILED, {
            "prototype": str(prototype),
            "stage": stage,
            "digest": document.content_digest,
        })
        if out_dir is not None:
            out_dir = Path(out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            for fmt in formats:
                path = out_dir / output_name(prototype, stage, fmt)
                path.write_bytes(render(document, fmt))
        return document

    # -- remaining audit-trail events ------------------------------------------

    def record_event(self, actor: str, kind: EventKind,
                     payload: dict[str, Any]) -> WorkflowEvent:
        return self.append(actor, kind, payload)

    # -- staleness ---------------------------------------------------------------

    def mark_component_stale(self, component: RecordId) -> None:
        self.repo = mark_stale(self.repo, component)

    # -- projections ---------------------------------------------------------------

    def readiness(self, prototype: RecordId, stage: int) -> ReadinessReport:
        return readiness_report(self.repo, self.state, prototype, stage)

    def stage_cell(self, prototype: RecordId, stage: int) -> dict[str, Any]:
        """One readiness-matrix cell: Granted, Ready, or Blocked(count)."""
        cell: dict[str, Any] = {
            "prototype": str(prototype),
            "stage": stage,
            "compiled": (prototype, stage) in self.state.compiled,
        }
        if stage in self.state.granted_stages(prototype):
            cell.update(status="Granted", blocking=0)
            return cell
        try:
            report = self.readiness(prototype, stage)
        except ConfigurationError as exc:
            cell.update(status="Blocked", blocking=1,
                        note=str(exc))
            return cell
        blocking = len(report.blocking_issues)
        cell.update(status="Ready" if blocking == 0 else "Blocked", blocking=blocking)
        return cell

    def overview(self) -> dict[str, Any]:
        """Prototype x stage grid plus hazard log and pending mismatches."""
        from .risk import hazard_log_summary

        grid = []
        for prototype_id in sorted(self.repo.prototypes):
            prototype = self.repo.prototypes[prototype_id]
            grid.append({
                "prototype": str(prototype_id),
                "name": prototype.name,
                "use_case": prototype.use_case,
                "granted": sorted(self.state.granted_stages(prototype_id)),
                "stages": [self.stage_cell(prototype_id, s) for s in range(1, 6)],
            })
        summary = hazard_log_summary(self.repo)
        return {
            "prototypes": grid,
            "hazard_log": {
                "total": summary.total,
                "rsil_counts": {str(k): v for k, v in sorted(summary.rsil_counts.items())},
                "status_counts": {s.value: n for s, n in summary.status_counts.items()},
                "unresolved": [str(h) for h in summary.unresolved],
            },
            "pending_mismatches": sorted(str(c) for c in self.state.pending_mismatches),
            "journal_length": len(self.repo.journal),
        }
