"""Release-precondition checks: composition completeness, trace chains,
mitigation obligations, and component-release template completeness.

All checks are pure functions over an immutable repository snapshot and
report root causes as ``ValidationIssue`` values, merged deterministically
into a ``ReadinessReport`` per prototype and stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

from .model import (
    ComponentReleaseDocument,
    CRD_MANDATORY_FIELDS,
    DocStatus,
    MeasureStatus,
    MitigationStatus,
    Recommendation,
    RecordId,
    ReleaseStatus,
    RequirementKind,
    Verdict,
)
from .risk import hazard_rsil

if TYPE_CHECKING:  # pragma: no cover
    from .store import Repository
    from .workflow import WorkflowState


class ConfigurationError(Exception):
    """A required stage composition is not configured."""


class IssueCategory(str, Enum):
    MISSING_MODULE = "MissingModule"
    BROKEN_TRACE = "BrokenTrace"
    UNMITIGATED_HAZARD = "UnmitigatedHazard"
    INCOMPLETE_TEMPLATE = "IncompleteTemplate"
    MISSING_REVIEW = "MissingReview"
    STALE_RELEASE = "StaleRelease"
    UNVERIFIED_MEASURE = "UnverifiedMeasure"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"  # reported but never blocks a release decision


_CATEGORY_ORDER = {category: index for index, category in enumerate(IssueCategory)}


@dataclass(frozen=True)
class ValidationIssue:
    category: IssueCategory
    subject: str
    message: str
    severity: Severity = Severity.ERROR

    def sort_key(self) -> tuple[int, str, str]:
        return (_CATEGORY_ORDER[self.category], self.subject, self.message)

    def to_json_dict(self) -> dict[str, str]:
        return {
            "category": self.category.value,
            "subject": self.subject,
            "message": self.message,
            "severity": self.severity.value,
        }

    def __str__(self) -> str:
        return f"[{self.category.value}] {self.subject}: {self.message}"


@dataclass
class ReadinessReport:
    """All issues hindering the release of one prototype at one stage."""

    prototype: RecordId
    stage: int
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out = {category.value: 0 for category in IssueCategory}
        for issue in self.issues:
            out[issue.category.value] += 1
        return out

    @property
    def blocking_issues(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity is Severity.ERROR]

    @property
    def is_ready(self) -> bool:
        return not self.blocking_issues

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "prototype": str(self.prototype),
            "stage": self.stage,
            "ready": self.is_ready,
            "issue_count": len(self.issues),
            "blocking_count": len(self.blocking_issues),
            "counts": self.counts,
            "issues": [i.to_json_dict() for i in self.issues],
        }

    def to_text(self) -> str:
        head = f"readiness {self.prototype} stage {self.stage}: "
        if not self.issues:
            return head + "ready, no issues\n"
        lines = [head + f"{len(self.blocking_issues)} blocking issue(s),"
                        f" {len(self.issues)} total"]
        lines += [f"  {issue}" for issue in self.issues]
        return "\n".join(lines) + "\n"


def _issue(category: IssueCategory, subject: Any, message: str,
           severity: Severity = Severity.ERROR) -> ValidationIssue:
    return ValidationIssue(category, str(subject), message, severity)


def check_composition(repo: "Repository", prototype: RecordId, stage: int
                      ) -> list[ValidationIssue]:
    """Required modules of the stage composition: issued system documents and
    released, non-stale component release documents."""
    composition = repo.composition_for(prototype, stage)
    if composition is None:
        raise ConfigurationError(
            f"no stage composition configured for {prototype} stage {stage}")

    issues: list[ValidationIssue] = []
    docs_by_kind = {doc.kind: doc for doc in repo.system_docs.values()
                    if doc.prototype == prototype}
    for kind in sorted(composition.required_system_docs, key=lambda k: k.value):
        doc = docs_by_kind.get(kind)
        if doc is None:
            issues.append(_issue(IssueCategory.MISSING_MODULE, prototype,
                                 f"system document {kind.value} does not exist"))
        elif doc.status is not DocStatus.ISSUED:
            issues.append(_issue(IssueCategory.MISSING_MODULE, doc.id,
                                 f"system document {kind.value} is still {doc.status.value}"))

    for component_id in sorted(composition.required_component_modules):
        component = repo.find(component_id)
        name = component.name if component is not None else str(component_id)
        released = [crd for crd in repo.releases_for(component_id, stage)
                    if crd.release_status is ReleaseStatus.RELEASED]
        if not released:
            candidates = repo.releases_for(component_id, stage)
            detail = (f" (status {candidates[0].release_status.value})"
                      if candidates else "")
            issues.append(_issue(
                IssueCategory.MISSING_MODULE, component_id,
                f"no released component release document for {name!r}"
                f" at stage {stage}{detail}"))
        else:
            for crd in released:
                if crd.stale:
                    issues.append(_issue(
                        IssueCategory.STALE_RELEASE, crd.id,
                        f"release document for {name!r} at stage {stage} is stale"
                        " after a component modification"))
    return issues


def check_traceability(repo: "Repository") -> list[ValidationIssue]:
    """Hazard -> safety goal -> FSR -> TSR -> component release chain checks."""
    issues: list[ValidationIssue] = []

    goals_by_hazard: dict[RecordId, list[RecordId]] = {}
    for goal in repo.safety_goals.values():
        goals_by_hazard.setdefault(goal.hazard, []).append(goal.id)

    for hazard_id in sorted(repo.hazards):
        if hazard_id not in goals_by_hazard:
            issues.append(_issue(IssueCategory.BROKEN_TRACE, hazard_id,
                                 "hazard has no safety goal"))

    fsrs_by_goal: dict[RecordId, list[RecordId]] = {}
    tsrs_by_fsr: dict[RecordId, list[RecordId]] = {}
    for req in repo.requirements.values():
        if req.kind is RequirementKind.FUNCTIONAL:
            fsrs_by_goal.setdefault(req.parent, []).append(req.id)
        else:
            tsrs_by_fsr.setdefault(req.parent, []).append(req.id)

    for goal_id in sorted(repo.safety_goals):
        if goal_id not in fsrs_by_goal:
            issues.append(_issue(IssueCategory.BROKEN_TRACE, goal_id,
                                 "safety goal has no functional safety requirement"))

    for req_id in sorted(repo.requirements):
        req = repo.requirements[req_id]
        if req.kind is RequirementKind.FUNCTIONAL:
            if req_id not in tsrs_by_fsr:
                issues.append(_issue(
                    IssueCategory.BROKEN_TRACE, req_id,
                    "functional requirement has no technical refinement yet",
                    severity=Severity.WARNING))
            continue
        if not req.allocated_to:
            issues.append(_issue(IssueCategory.BROKEN_TRACE, req_id,
                                 "technical requirement is not allocated to any component"))
            continue
        for component_id in sorted(req.allocated_to):
            releases = repo.releases_for(component_id)
            if not releases:
                continue  # surfaces as MissingModule once the stage requires the component
            if not any(req_id in crd.covered_requirements for crd in releases):
                component = repo.find(component_id)
                name = component.name if component is not None else str(component_id)
                issues.append(_issue(
                    IssueCategory.BROKEN_TRACE, req_id,
                    f"allocated to {name!r} but not covered by any of its"
                    " release documents"))
    return issues


def check_mitigation(repo: "Repository") -> list[ValidationIssue]:
    """Mitigation obligations: hazards with an integrity requirement (RSIL >= 1)
    must reach MeasuresTested, and tested measures need passing test records."""
    issues: list[ValidationIssue] = []
    tests = repo.test_record_index()

    for hazard_id in sorted(repo.hazards):
        hazard = repo.hazards[hazard_id]
        rsil = hazard_rsil(repo, hazard_id)
        if rsil >= 1 and hazard.mitigation_status is not MitigationStatus.MEASURES_TESTED:
            issues.append(_issue(
                IssueCategory.UNMITIGATED_HAZARD, hazard_id,
                f"RSIL {rsil} hazard is at {hazard.mitigation_status.value};"
                " measures must be defined, implemented, and tested"))
        for index, measure in enumerate(hazard.measures):
            if measure.status is not MeasureStatus.TESTED:
                continue
            passing = [t for ref in measure.verified_by
                       for _, t in tests.get(ref, [])
                       if t.verdict is Verdict.PASS]
            if not passing:
                issues.append(_issue(
                    IssueCategory.UNVERIFIED_MEASURE, hazard_id,
                    f"measure[{index}] {measure.description!r} is marked Tested"
                    " but has no passing test record"))
    return issues


def check_component_release(crd: ComponentReleaseDocument) -> list[ValidationIssue]:
    """Template completeness of one component release document."""
    issues: list[ValidationIssue] = []
    for name in CRD_MANDATORY_FIELDS:
        if not getattr(crd, name).strip():
            issues.append(_issue(IssueCategory.INCOMPLETE_TEMPLATE, crd.id,
                                 f"mandatory template field {name!r} is empty"))
    passed = {str(ref) for test in crd.test_records if test.verdict is Verdict.PASS
              for ref in test.requirement_refs}
    for ref in sorted(crd.covered_requirements):
        if str(ref) not in passed:
            issues.append(_issue(
                IssueCategory.BROKEN_TRACE, ref,
                f"covered requirement has no passing test record in {crd.id}"))
    return issues


def trace_rows(repo: "Repository") -> list[dict[str, Any]]:
    """Flattened hazard -> goal -> FSR -> TSR -> release-document chains for
    the traceability matrix; a chain stops at its first missing link."""
    rows: list[dict[str, Any]] = []
    covering: dict[RecordId, list[str]] = {}
    for crd in repo.component_releases.values():
        for ref in crd.covered_requirements:
            covering.setdefault(ref, []).append(str(crd.id))

    def emit(hazard, goal=None, fsr=None, tsr=None) -> None:
        components: list[str] = []
        documents: list[str] = []
        if tsr is not None:
            for component_id in sorted(tsr.allocated_to):
                component = repo.find(component_id)
                components.append(component.name if component else str(component_id))
            documents = sorted(covering.get(tsr.id, []))
        rows.append({
            "hazard": str(hazard.id),
            "hazard_description": hazard.description,
            "goal": str(goal.id) if goal else None,
            "fsr": str(fsr.id) if fsr else None,
            "tsr": str(tsr.id) if tsr else None,
            "components": components,
            "release_documents": documents,
            "complete": bool(tsr is not None and documents),
        })

    for hazard_id in sorted(repo.hazards):
        hazard = repo.hazards[hazard_id]
        goals = sorted((g for g in repo.safety_goals.values()
                        if g.hazard == hazard_id), key=lambda g: g.id)
        if not goals:
            emit(hazard)
            continue
        for goal in goals:
            fsrs = sorted((r for r in repo.requirements.values()
                           if r.kind is RequirementKind.FUNCTIONAL
                           and r.parent == goal.id), key=lambda r: r.id)
            if not fsrs:
                emit(hazard, goal)
                continue
            for fsr in fsrs:
                tsrs = sorted((r for r in repo.requirements.values()
                               if r.kind is RequirementKind.TECHNICAL
                               and r.parent == fsr.id), key=lambda r: r.id)
                if not tsrs:
                    emit(hazard, goal, fsr)
                    continue
                for tsr in tsrs:
                    emit(hazard, goal, fsr, tsr)
    return rows


def readiness_report(repo: "Repository", state: "WorkflowState | None",
                     prototype: RecordId, stage: int) -> ReadinessReport:
    """Merge every check for (prototype, stage) into one deterministic report.

    The workflow state is accepted for interface symmetry with the release
    gate; all evidence checked here lives in the record repository itself.
    """
    issues = list(check_composition(repo, prototype, stage))
    issues += check_traceability(repo)
    issues += check_mitigation(repo)

    composition = repo.composition_for(prototype, stage)
    for component_id in sorted(composition.required_component_modules):
        for crd in repo.releases_for(component_id, stage):
            issues += check_component_release(crd)

    has_for_review = any(
        review.prototype == prototype and review.stage == stage
        and review.recommendation is Recommendation.FOR
        for review in repo.reviews.values())
    if not has_for_review:
        issues.append(_issue(
            IssueCategory.MISSING_REVIEW, prototype,
            f"no recommendation-for review recorded for stage {stage}"))

    unique = sorted(set(issues), key=ValidationIssue.sort_key)
    return ReadinessReport(prototype=prototype, stage=stage, issues=unique)
