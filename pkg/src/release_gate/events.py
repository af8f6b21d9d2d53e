"""Workflow events and their canonical NDJSON journal encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .model import Role


class EventKind(str, Enum):
    INITIAL_ANALYSES_COMPLETED = "InitialAnalysesCompleted"
    PRELIMINARY_SAFETY_CONCEPT_ISSUED = "PreliminarySafetyConceptIssued"
    IMPLEMENTATION_SUBMITTED = "ImplementationSubmitted"
    DOCUMENTATION_EXAMINED = "DocumentationExamined"
    MISMATCH_FOUND = "MismatchFound"
    COMPONENT_RELEASE_ISSUED = "ComponentReleaseIssued"
    SAFETY_DOCUMENTATION_UPDATED = "SafetyDocumentationUpdated"
    TEST_ACCOMPANIED = "TestAccompanied"
    REVIEW_COMPLETED = "ReviewCompleted"
    RELEASE_DOCUMENT_COMPILED = "ReleaseDocumentCompiled"
    RELEASE_DECIDED = "ReleaseDecided"
    OPERATION_RECORDED = "OperationRecorded"


# Exactly one permitted role per event kind (one swimlane per task).
PERMITTED_ROLE: dict[EventKind, Role] = {
    EventKind.INITIAL_ANALYSES_COMPLETED: Role.SAFETY_ENGINEER,
    EventKind.PRELIMINARY_SAFETY_CONCEPT_ISSUED: Role.SAFETY_ENGINEER,
    EventKind.IMPLEMENTATION_SUBMITTED: Role.FUNCTION_DEVELOPER,
    EventKind.DOCUMENTATION_EXAMINED: Role.SAFETY_ENGINEER,
    EventKind.MISMATCH_FOUND: Role.SAFETY_ENGINEER,
    EventKind.COMPONENT_RELEASE_ISSUED: Role.FUNCTION_DEVELOPER,
    EventKind.SAFETY_DOCUMENTATION_UPDATED: Role.SAFETY_ENGINEER,
    EventKind.TEST_ACCOMPANIED: Role.CERTIFICATION_AGENCY,
    EventKind.REVIEW_COMPLETED: Role.CERTIFICATION_AGENCY,
    EventKind.RELEASE_DOCUMENT_COMPILED: Role.SAFETY_ENGINEER,
    EventKind.RELEASE_DECIDED: Role.RELEASE_COMMITTEE,
    EventKind.OPERATION_RECORDED: Role.FUNCTION_DEVELOPER,
}


@dataclass(frozen=True)
class WorkflowEvent:
    """One journal entry; seq numbers are contiguous starting at 1."""

    seq: int
    actor: str
    kind: EventKind
    payload: dict[str, Any] = field(default_factory=dict)
    timestamp: str = ""

    def to_line(self) -> str:
        """Canonical journal line: fixed key order, sorted payload, compact."""
        obj = {
            "seq": self.seq,
            "actor": self.actor,
            "kind": self.kind.value,
            "payload": {k: self.payload[k] for k in sorted(self.payload)},
            "timestamp": self.timestamp,
        }
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "WorkflowEvent":
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise ValueError("journal line is not an object")
        try:
            kind = EventKind(obj["kind"])
        except (KeyError, ValueError):
            raise ValueError(f"unknown event kind: {obj.get('kind')!r}") from None
        seq = obj.get("seq")
        if not isinstance(seq, int) or seq < 1:
            raise ValueError(f"event seq must be a positive integer, got {seq!r}")
        payload = obj.get("payload", {})
        if not isinstance(payload, dict):
            raise ValueError("event payload must be an object")
        return cls(
            seq=seq,
            actor=str(obj.get("actor", "")),
            kind=kind,
            payload=payload,
            timestamp=str(obj.get("timestamp", "")),
        )
