"""Event-sourced workflow: actor-gated transitions, the mismatch loop,
gradual stage granting, and the operating-condition gate for recorded test
operation.

State transitions are pure: ``apply_event(state, event, repo)`` returns a
new state and never mutates its inputs, so ``replay`` over the journal and
incremental application are interchangeable.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .events import EventKind, PERMITTED_ROLE, WorkflowEvent
from .model import (
    ComponentReleaseDocument,
    DecisionVerdict,
    Recommendation,
    RecordId,
    RecordKind,
    ReleaseDecision,
    ReleaseStatus,
    StageDefinition,
    Verdict,
    is_stage_prefix,
)
from .validation import ReadinessReport, readiness_report

if TYPE_CHECKING:  # pragma: no cover
    from .store import Repository


class WorkflowError(Exception):
    """Base class for every gate violation (CLI exit code 3)."""


class RoleGateError(WorkflowError):
    pass


class SequencingError(WorkflowError):
    pass


class GradualGatingError(WorkflowError):
    pass


class OperatingConditionError(WorkflowError):
    pass


class ContiguityError(WorkflowError):
    pass


class BlockedReleaseError(WorkflowError):
    """Release blocked by outstanding issues; embeds the readiness report."""

    def __init__(self, reasons: list[str], report: ReadinessReport | None = None):
        self.reasons = reasons
        self.report = report
        super().__init__("release blocked:\n  " + "\n  ".join(reasons))


class ReplayError(WorkflowError):
    def __init__(self, seq: int, cause: Exception):
        self.seq = seq
        super().__init__(f"replay aborted at seq {seq}: {cause}")


@dataclass
class WorkflowState:
    """Projection of the journal: granted stages, release-module statuses,
    pending mismatches, reviews, and compiled-document availability."""

    granted: dict[RecordId, set[int]] = field(default_factory=dict)
    crd_status: dict[RecordId, ReleaseStatus] = field(default_factory=dict)
    pending_mismatches: set[RecordId] = field(default_factory=set)
    reviews: dict[tuple[RecordId, int], tuple[RecordId, Recommendation]] = field(
        default_factory=dict)
    compiled: dict[tuple[RecordId, int], str] = field(default_factory=dict)
    last_seq: int = 0

    def granted_stages(self, prototype: RecordId) -> set[int]:
        return set(self.granted.get(prototype, set()))

    def highest_granted(self, prototype: RecordId) -> int:
        return max(self.granted.get(prototype, set()), default=0)

    def clone(self) -> "WorkflowState":
        return copy.deepcopy(self)


def empty_state() -> WorkflowState:
    return WorkflowState()


def _payload_id(event: WorkflowEvent, key: str, kind: RecordKind) -> RecordId:
    raw = event.payload.get(key)
    if raw is None:
        raise SequencingError(f"event {event.kind.value} requires payload key {key!r}")
    rid = RecordId.parse(str(raw))
    if rid.kind is not kind:
        raise SequencingError(f"payload {key}={rid} is not a {kind.value} reference")
    return rid


def require_developer_of(actor: str, crd: ComponentReleaseDocument,
                         repo: "Repository", action: str) -> None:
    """Components are released by the developer they are assigned to."""
    component = repo.find(crd.component)
    if component is None:
        raise SequencingError(f"{crd.id} references missing component {crd.component}")
    if actor != component.developer:
        raise RoleGateError(
            f"{action} for {crd.id} requires the component's developer"
            f" {component.developer!r}, not {actor!r}")


def require_verified_coverage(crd: ComponentReleaseDocument) -> None:
    """Every covered requirement needs at least one passing test record."""
    passed = {str(ref) for test in crd.test_records if test.verdict is Verdict.PASS
              for ref in test.requirement_refs}
    unverified = [str(ref) for ref in crd.covered_requirements
                  if str(ref) not in passed]
    if unverified:
        raise SequencingError(
            f"{crd.id} covers requirements without passing test records:"
            f" {', '.join(unverified)}")


def apply_event(state: WorkflowState, event: WorkflowEvent,
                repo: "Repository") -> WorkflowState:
    """Apply one journal event, enforcing seq contiguity, the role gate, and
    the state-machine sequencing rules.

    Gates that depend on record evidence (developer ownership, passing test
    coverage) are enforced when the event is appended, not on replay: the
    journal is history, while the records may legitimately have moved on.
    """
    if event.seq != state.last_seq + 1:
        raise ContiguityError(
            f"event seq {event.seq} breaks contiguity, expected {state.last_seq + 1}")

    actor = repo.actors.get(event.actor)
    if actor is None:
        raise RoleGateError(f"unknown actor {event.actor!r}")
    required = PERMITTED_ROLE[event.kind]
    if actor.role is not required:
        raise RoleGateError(
            f"{event.kind.value} requires {required.value}, actor {event.actor!r}"
            f" has role {actor.role.value}")

    new = state.clone()

    if event.kind is EventKind.IMPLEMENTATION_SUBMITTED:
        crd_id = _payload_id(event, "crd", RecordKind.CRD)
        new.crd_status[crd_id] = ReleaseStatus.SUBMITTED
        new.pending_mismatches.discard(crd_id)

    elif event.kind is EventKind.MISMATCH_FOUND:
        crd_id = _payload_id(event, "crd", RecordKind.CRD)
        new.crd_status[crd_id] = ReleaseStatus.MISMATCH_FLAGGED
        new.pending_mismatches.add(crd_id)

    elif event.kind is EventKind.COMPONENT_RELEASE_ISSUED:
        crd_id = _payload_id(event, "crd", RecordKind.CRD)
        current = new.crd_status.get(crd_id, ReleaseStatus.DRAFT)
        if current is ReleaseStatus.MISMATCH_FLAGGED:
            raise SequencingError(
                f"{crd_id} is mismatch-flagged and must be resubmitted before release")
        if current is not ReleaseStatus.SUBMITTED:
            raise SequencingError(
                f"{crd_id} must be submitted before a component release is issued"
                f" (currently {current.value})")
        new.crd_status[crd_id] = ReleaseStatus.RELEASED

    elif event.kind is EventKind.REVIEW_COMPLETED:
        prototype = _payload_id(event, "prototype", RecordKind.PRO)
        stage = int(event.payload.get("stage", 0))
        review_id = _payload_id(event, "review", RecordKind.RVW)
        recommendation = Recommendation(event.payload.get("recommendation", "For"))
        new.reviews[(prototype, stage)] = (review_id, recommendation)

    elif event.kind is EventKind.RELEASE_DOCUMENT_COMPILED:
        prototype = _payload_id(event, "prototype", RecordKind.PRO)
        stage = int(event.payload.get("stage", 0))
        new.compiled[(prototype, stage)] = str(event.payload.get("digest", ""))

    elif event.kind is EventKind.RELEASE_DECIDED:
        prototype = _payload_id(event, "prototype", RecordKind.PRO)
        stage = int(event.payload.get("stage", 0))
        verdict = DecisionVerdict(event.payload.get("verdict", "Rejected"))
        if verdict is DecisionVerdict.GRANTED:
            new = _grant_from_state(new, prototype, stage)

    elif event.kind is EventKind.OPERATION_RECORDED:
        # test operation must stay within the granted operating conditions
        prototype = _payload_id(event, "prototype", RecordKind.PRO)
        stage_context = int(event.payload.get("stage_context", 0))
        highest = new.highest_granted(prototype)
        if stage_context > highest:
            granted = (f"highest granted stage is {highest}" if highest
                       else "no stage granted yet")
            raise OperatingConditionError(
                f"operation at stage {stage_context} conditions is not permitted"
                f" for {prototype}: {granted}")

    # InitialAnalysesCompleted, PreliminarySafetyConceptIssued,
    # DocumentationExamined, SafetyDocumentationUpdated, and TestAccompanied
    # are recorded for the audit trail without changing gate state.

    new.last_seq = event.seq
    return new


def _check_gradual_gating(state: WorkflowState, prototype: RecordId, stage: int) -> None:
    granted = state.granted_stages(prototype)
    if stage != 1 and (stage - 1) not in granted:
        raise GradualGatingError(
            f"stage {stage} for {prototype} requires stage {stage - 1} to be"
            f" granted first (granted: {sorted(granted) or 'none'})")


def _grant_from_state(state: WorkflowState, prototype: RecordId,
                      stage: int) -> WorkflowState:
    """State-level grant gates, reconstructible from the journal alone:
    gradual gating, a compiled document, and a recommendation-for review."""
    if stage in state.granted_stages(prototype):
        return state  # re-affirming an existing grant keeps the prefix intact
    _check_gradual_gating(state, prototype, stage)

    reasons = []
    if (prototype, stage) not in state.compiled:
        reasons.append(f"no compiled release document for stage {stage}")
    review = state.reviews.get((prototype, stage))
    if review is None:
        reasons.append(f"no review completed for stage {stage}")
    elif review[1] is Recommendation.AGAINST:
        reasons.append(f"review {review[0]} recommends against the release")
    if reasons:
        raise BlockedReleaseError(reasons)

    new = state.clone()
    new.granted.setdefault(prototype, set()).add(stage)
    assert is_stage_prefix(new.granted[prototype])
    return new


def grant_stage(state: WorkflowState, decision: ReleaseDecision,
                repo: "Repository") -> WorkflowState:
    """Decision-time grant: gradual gating plus an issue-free readiness
    report, a compiled release document, and a recommendation-for review.

    Replay relies on the state-level gates only; the evidence in the
    repository may legitimately change after a decision was taken (e.g.
    a release marked stale), which blocks future decisions but does not
    rewrite history.
    """
    if decision.verdict is not DecisionVerdict.GRANTED:
        raise WorkflowError("grant_stage applies only to granted decisions")
    prototype = decision.prototype
    if repo.find(prototype) is None:
        raise SequencingError(f"unknown prototype {prototype}")

    stage = decision.stage
    if stage in state.granted_stages(prototype):
        return state
    _check_gradual_gating(state, prototype, stage)

    report = readiness_report(repo, state, prototype, stage)
    reasons = [str(issue) for issue in report.blocking_issues]
    if (prototype, stage) not in state.compiled:
        reasons.append(f"no compiled release document for stage {stage}")
    review = state.reviews.get((prototype, stage))
    if review is not None and review[1] is Recommendation.AGAINST:
        reasons.append(f"review {review[0]} recommends against the release")
    if reasons:
        raise BlockedReleaseError(reasons, report)

    return _grant_from_state(state, prototype, stage)


def permissible_conditions(state: WorkflowState, prototype: RecordId,
                           repo: "Repository") -> StageDefinition | None:
    """Operating conditions of the highest granted stage, if any."""
    highest = state.highest_granted(prototype)
    if highest == 0:
        return None
    return repo.stage_definition(highest)


def replay(journal: list[WorkflowEvent], repo: "Repository") -> WorkflowState:
    """Fold the journal from the empty state; deterministic."""
    state = empty_state()
    for event in journal:
        try:
            state = apply_event(state, event, repo)
        except ContiguityError:
            raise
        except WorkflowError as exc:
            raise ReplayError(event.seq, exc) from exc
    return state


def mark_stale(repo: "Repository", component: RecordId) -> "Repository":
    """Flag every released document of a modified component as stale.

    Returns a new repository snapshot; readiness for stages whose composition
    includes the flagged documents will report StaleRelease issues.
    """
    if repo.find(component) is None:
        raise SequencingError(f"unknown component {component}")
    new = copy.deepcopy(repo)
    for crd in new.component_releases.values():
        if crd.component == component and crd.release_status is ReleaseStatus.RELEASED:
            crd.stale = True
    return new
