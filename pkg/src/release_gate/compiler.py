"""Deterministic assembly of release documents.

A release document bundles the system-wide safety documentation, the
components release documentation, and the review documentation for one
prototype and stage. Compilation is a pure function of the repository
snapshot: section order, key order, and the content digest are stable
across runs and across record-file orderings on disk.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from .model import (
    Component,
    ComponentReleaseDocument,
    RecordId,
    RecordKind,
    RequirementKind,
    SystemDocKind,
    Verdict,
)
from .risk import RSIL_WORDING, hazard_log_summary, hazard_rsil
from .store import canonical_json_bytes, encode_record
from .validation import IssueCategory, ReadinessReport, readiness_report

if TYPE_CHECKING:  # pragma: no cover
    from .store import Repository
    from .workflow import WorkflowState

# Fixed system-wide section order within every release document.
SYSTEM_DOC_ORDER: tuple[SystemDocKind, ...] = (
    SystemDocKind.SAFETY_PLAN,
    SystemDocKind.ITEM_DEFINITION,
    SystemDocKind.HARA,
    SystemDocKind.FUNCTIONAL_SAFETY_CONCEPT,
    SystemDocKind.TECHNICAL_SAFETY_CONCEPT,
    SystemDocKind.SAFETY_CASE,
    SystemDocKind.OPERATING_INSTRUCTIONS,
)

TOP_LEVEL_CLAIM = "Absence of unreasonable risk"


class CompileError(Exception):
    pass


class CompileRefusedError(CompileError):
    """Compilation refused because required modules are missing."""

    def __init__(self, report: ReadinessReport):
        self.report = report
        missing = [str(i) for i in report.issues
                   if i.category is IssueCategory.MISSING_MODULE]
        super().__init__("cannot compile, required modules are missing:\n  "
                         + "\n  ".join(missing))


@dataclass
class ReleaseDocument:
    """Compiled evidence bundle for one prototype and stage.

    All section payloads are plain JSON-compatible data so that the JSON
    rendering round-trips to an equal document.
    """

    prototype: str
    prototype_name: str
    stage: int
    stage_description: str
    operating_conditions: str
    system_wide_section: list[dict[str, Any]] = field(default_factory=list)
    components_section: list[dict[str, Any]] = field(default_factory=list)
    review_section: dict[str, Any] | None = None
    disclosed_issues: list[dict[str, Any]] = field(default_factory=list)
    metrics: dict[str, int] = field(default_factory=dict)
    content_digest: str = ""

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "prototype": self.prototype,
            "prototype_name": self.prototype_name,
            "stage": self.stage,
            "stage_description": self.stage_description,
            "operating_conditions": self.operating_conditions,
            "system_wide_section": self.system_wide_section,
            "components_section": self.components_section,
            "review_section": self.review_section,
            "disclosed_issues": self.disclosed_issues,
            "metrics": self.metrics,
            "content_digest": self.content_digest,
        }

    @classmethod
    def from_json_dict(cls, obj: dict[str, Any]) -> "ReleaseDocument":
        return cls(
            prototype=obj["prototype"],
            prototype_name=obj["prototype_name"],
            stage=obj["stage"],
            stage_description=obj["stage_description"],
            operating_conditions=obj["operating_conditions"],
            system_wide_section=obj["system_wide_section"],
            components_section=obj["components_section"],
            review_section=obj["review_section"],
            disclosed_issues=obj["disclosed_issues"],
            metrics=obj["metrics"],
            content_digest=obj["content_digest"],
        )


def _digest(document: ReleaseDocument) -> str:
    body = document.to_json_dict()
    body.pop("content_digest")
    return hashlib.sha256(
        json.dumps(body, ensure_ascii=False, sort_keys=True,
                   separators=(",", ":")).encode("utf-8")).hexdigest()


def hazard_log_table(repo: "Repository") -> dict[str, Any]:
    summary = hazard_log_summary(repo)
    rows = []
    for hazard_id in sorted(repo.hazards):
        hazard = repo.hazards[hazard_id]
        rsil = hazard_rsil(repo, hazard_id)
        scenario_ids = sorted(str(hs.id) for hs in repo.hazardous_scenarios.values()
                              if hs.hazard == hazard_id)
        rows.append({
            "hazard": str(hazard_id),
            "description": hazard.description,
            "rsil": rsil,
            "risk_wording": RSIL_WORDING[rsil],
            "mitigation_status": hazard.mitigation_status.value,
            "hazardous_scenarios": scenario_ids,
        })
    return {
        "total": summary.total,
        "rsil_counts": {str(k): v for k, v in sorted(summary.rsil_counts.items())},
        "status_counts": {s.value: summary.status_counts[s]
                          for s in summary.status_counts},
        "unresolved": [str(h) for h in summary.unresolved],
        "rows": rows,
    }


def _requirement_links(repo: "Repository",
                       crds: list[ComponentReleaseDocument]) -> list[dict[str, Any]]:
    """TSR -> component-release link table over the document's components."""
    component_ids = {crd.component for crd in crds}
    covering: dict[RecordId, list[str]] = {}
    for crd in crds:
        for ref in crd.covered_requirements:
            covering.setdefault(ref, []).append(str(crd.id))

    links = []
    for req_id in sorted(repo.requirements):
        req = repo.requirements[req_id]
        if req.kind is not RequirementKind.TECHNICAL:
            continue
        if not component_ids.intersection(req.allocated_to):
            continue
        passing = sorted({
            test.id for crd in crds for test in crd.test_records
            if test.verdict is Verdict.PASS and req_id in test.requirement_refs})
        links.append({
            "requirement": str(req_id),
            "statement": req.statement,
            "rsil": req.inherited_rsil,
            "allocated_to": sorted(str(c) for c in req.allocated_to),
            "release_documents": sorted(covering.get(req_id, [])),
            "passing_tests": passing,
        })
    return links


def _claim_tree(repo: "Repository", crds: list[ComponentReleaseDocument],
                prototype_name: str, stage: int) -> dict[str, Any]:
    """Two-level claim/evidence tree with the top-level risk claim at the root."""
    covering: dict[RecordId, list[str]] = {}
    for crd in crds:
        for ref in crd.covered_requirements:
            covering.setdefault(ref, []).append(str(crd.id))

    children = []
    for goal_id in sorted(repo.safety_goals):
        goal = repo.safety_goals[goal_id]
        fsrs = sorted(r.id for r in repo.requirements.values()
                      if r.kind is RequirementKind.FUNCTIONAL and r.parent == goal_id)
        tsrs = sorted(r.id for r in repo.requirements.values()
                      if r.kind is RequirementKind.TECHNICAL and r.parent in fsrs)
        evidence_docs = sorted({doc for tsr in tsrs for doc in covering.get(tsr, [])})
        children.append({
            "goal": str(goal_id),
            "claim": goal.statement,
            "hazard": str(goal.hazard),
            "rsil": goal.rsil,
            "functional_requirements": [str(r) for r in fsrs],
            "technical_requirements": [str(r) for r in tsrs],
            "evidence": evidence_docs,
        })
    return {
        "claim": f"{TOP_LEVEL_CLAIM} in the stage-{stage} operation of {prototype_name}",
        "children": children,
    }


def compile(repo: "Repository", state: "WorkflowState | None",
            prototype: RecordId, stage: int) -> ReleaseDocument:
    """Assemble the release document for (prototype, stage).

    Refused while required modules are missing; all other readiness issues
    are embedded as a disclosed-issues annex so the committee sees residual
    deficits instead of a hidden gap.
    """
    report = readiness_report(repo, state, prototype, stage)
    if any(i.category is IssueCategory.MISSING_MODULE for i in report.issues):
        raise CompileRefusedError(report)

    proto = repo.find(prototype)
    if proto is None:
        raise CompileError(f"unknown prototype {prototype}")
    stage_def = repo.stage_definition(stage)
    if stage_def is None:
        raise CompileError(f"stage {stage} is not defined")
    composition = repo.composition_for(prototype, stage)

    crds: list[ComponentReleaseDocument] = []
    for component_id in sorted(composition.required_component_modules):
        crds.extend(repo.releases_for(component_id, stage))
    crds.sort(key=lambda c: (c.component, c.id))

    docs_by_kind = {doc.kind: doc for doc in repo.system_docs.values()
                    if doc.prototype == prototype}
    system_section: list[dict[str, Any]] = []
    for kind in SYSTEM_DOC_ORDER:
        if kind not in composition.required_system_docs:
            continue
        doc = docs_by_kind[kind]  # guaranteed by the MissingModule gate
        entry: dict[str, Any] = {
            "kind": kind.value,
            "doc_id": str(doc.id),
            "status": doc.status.value,
            "content": doc.content,
        }
        if kind is SystemDocKind.HARA:
            entry["hazard_log"] = hazard_log_table(repo)
        elif kind is SystemDocKind.TECHNICAL_SAFETY_CONCEPT:
            entry["requirement_links"] = _requirement_links(repo, crds)
        elif kind is SystemDocKind.SAFETY_CASE:
            entry["claim_tree"] = _claim_tree(repo, crds, proto.name, stage)
        system_section.append(entry)

    components_section = []
    for crd in crds:
        component: Component = repo.find(crd.component)
        entry = dict(encode_record(crd))
        entry["component_name"] = component.name
        components_section.append(entry)

    reviews = sorted((r for r in repo.reviews.values()
                      if r.prototype == prototype and r.stage == stage),
                     key=lambda r: r.id)
    review_section = dict(encode_record(reviews[-1])) if reviews else None

    disclosed = [issue.to_json_dict() for issue in report.issues]

    word_count = 0
    for entry in system_section:
        word_count += len(entry["content"].split())
    for entry in components_section:
        for name in ("functions_and_interfaces", "subsystem_boundaries",
                     "fallback_mechanisms", "known_limitations",
                     "mitigation_strategies"):
            word_count += len(entry[name].split())
    if review_section is not None:
        word_count += len(review_section["notes"].split())

    document = ReleaseDocument(
        prototype=str(prototype),
        prototype_name=proto.name,
        stage=stage,
        stage_description=stage_def.description,
        operating_conditions=stage_def.operating_conditions,
        system_wide_section=system_section,
        components_section=components_section,
        review_section=review_section,
        disclosed_issues=disclosed,
        metrics={
            "system_documents": len(system_section),
            "component_releases": len(components_section),
            "hazards": len(repo.hazards),
            "requirement_links": sum(
                len(e.get("requirement_links", [])) for e in system_section),
            "test_records": sum(len(e["test_records"]) for e in components_section),
            "word_count": word_count,
        },
    )
    document.content_digest = _digest(document)
    _assert_linked(document)
    return document


def _assert_linked(document: ReleaseDocument) -> None:
    """Every linked requirement must surface in a component release unless the
    gap is already disclosed as an issue."""
    disclosed_subjects = {i["subject"] for i in document.disclosed_issues}
    for entry in document.system_wide_section:
        for link in entry.get("requirement_links", []):
            if not link["release_documents"] and link["requirement"] not in disclosed_subjects:
                raise CompileError(
                    f"requirement {link['requirement']} has no covering release"
                    " document and no disclosed issue")


def render(document: ReleaseDocument, format: str) -> bytes:
    """Render a compiled document as canonical JSON or sectioned text."""
    if format == "JSON":
        return canonical_json_bytes(document.to_json_dict())
    if format != "Text":
        raise ValueError(f"unknown render format {format!r}; expected Text or JSON")
    return _render_text(document).encode("utf-8")


def _rule(char: str = "=") -> str:
    return char * 72


def _render_text(document: ReleaseDocument) -> str:
    lines: list[str] = []
    lines.append(_rule())
    lines.append(f"RELEASE DOCUMENT  {document.prototype_name} ({document.prototype})"
                 f"  stage {document.stage}")
    lines.append(_rule())
    lines.append(f"Release stage ... {document.stage}: {document.stage_description}")
    lines.append(f"Operating conditions ... {document.operating_conditions}")
    lines.append(f"Content digest ... {document.content_digest}")
    lines.append("")

    toc = ["1. System-wide safety documentation"]
    for i, entry in enumerate(document.system_wide_section, start=1):
        toc.append(f"   1.{i} {entry['kind']}")
    toc.append("2. Components release documentation")
    for i, entry in enumerate(document.components_section, start=1):
        toc.append(f"   2.{i} {entry['component_name']} ({entry['id']})")
    toc.append("3. Review documentation")
    toc.append("4. Disclosed issues")
    toc.append("5. Metrics")
    lines.append("TABLE OF CONTENTS")
    lines.extend(toc)
    lines.append("")

    lines.append(_rule())
    lines.append("1. SYSTEM-WIDE SAFETY DOCUMENTATION")
    lines.append(_rule())
    for i, entry in enumerate(document.system_wide_section, start=1):
        lines.append("")
        lines.append(f"1.{i} {entry['kind']}  [{entry['doc_id']}, {entry['status']}]")
        lines.append(_rule("-"))
        if entry["content"]:
            lines.append(entry["content"])
        if "hazard_log" in entry:
            log = entry["hazard_log"]
            lines.append("")
            lines.append(f"Hazard log ({log['total']} hazards;"
                         f" unresolved: {len(log['unresolved'])})")
            lines.append(f"{'hazard':<10} {'RSIL':<5} {'risk':<28}"
                         f" {'mitigation':<22} scenarios")
            for row in log["rows"]:
                lines.append(f"{row['hazard']:<10} {row['rsil']:<5}"
                             f" {row['risk_wording']:<28}"
                             f" {row['mitigation_status']:<22}"
                             f" {', '.join(row['hazardous_scenarios'])}")
        if "requirement_links" in entry:
            lines.append("")
            lines.append("Technical safety requirements and covering release documents")
            for link in entry["requirement_links"]:
                docs = ", ".join(link["release_documents"]) or "NOT COVERED"
                lines.append(f"{link['requirement']} (RSIL {link['rsil']}) -> {docs}")
                lines.append(f"    {link['statement']}")
        if "claim_tree" in entry:
            tree = entry["claim_tree"]
            lines.append("")
            lines.append(f"Claim: {tree['claim']}")
            for child in tree["children"]:
                lines.append(f"  |- {child['goal']} (RSIL {child['rsil']}):"
                             f" {child['claim']}")
                evidence = ", ".join(child["evidence"]) or "none"
                lines.append(f"  |    evidence: {evidence}")

    lines.append("")
    lines.append(_rule())
    lines.append("2. COMPONENTS RELEASE DOCUMENTATION")
    lines.append(_rule())
    for i, entry in enumerate(document.components_section, start=1):
        lines.append("")
        lines.append(f"2.{i} {entry['component_name']}  [{entry['id']},"
                     f" stage {entry['stage']}, {entry['release_status']}]")
        lines.append(_rule("-"))
        lines.append(f"Functions and interfaces: {entry['functions_and_interfaces']}")
        lines.append(f"Subsystem boundaries:     {entry['subsystem_boundaries']}")
        lines.append(f"Fallback mechanisms:      {entry['fallback_mechanisms']}")
        lines.append(f"Known limitations:        {entry['known_limitations']}")
        lines.append(f"Mitigation strategies:    {entry['mitigation_strategies']}")
        lines.append(f"Hazards caused:           {', '.join(entry['hazards_caused']) or 'none'}")
        lines.append(f"Covered requirements:     {', '.join(entry['covered_requirements'])}")
        lines.append(f"Released by:              {entry['released_by'] or '-'}")
        lines.append("Test records:")
        for test in entry["test_records"]:
            refs = ", ".join(test["requirement_refs"])
            lines.append(f"  {test['id']}: {test['environment']} at stage"
                         f" {test['stage_context']} -> {test['verdict']} ({refs})")

    lines.append("")
    lines.append(_rule())
    lines.append("3. REVIEW DOCUMENTATION")
    lines.append(_rule())
    if document.review_section is None:
        lines.append("No review recorded for this stage.")
    else:
        review = document.review_section
        lines.append(f"{review['id']}: recommendation {review['recommendation']}"
                     f" by {review['reviewer']}")
        lines.append(review["notes"])

    lines.append("")
    lines.append(_rule())
    lines.append("4. DISCLOSED ISSUES")
    lines.append(_rule())
    if not document.disclosed_issues:
        lines.append("No outstanding issues.")
    else:
        for issue in document.disclosed_issues:
            lines.append(f"[{issue['category']}] {issue['subject']}:"
                         f" {issue['message']}")

    lines.append("")
    lines.append(_rule())
    lines.append("5. METRICS")
    lines.append(_rule())
    for key in sorted(document.metrics):
        lines.append(f"{key}: {document.metrics[key]}")
    lines.append("")
    return "\n".join(lines)


def output_name(prototype: RecordId, stage: int, format: str) -> str:
    ext = {"Text": "txt", "JSON": "json"}[format]
    return f"release-{prototype}-stage{stage}.{ext}"


def component_template(repo: "Repository", component: RecordId,
                       stage: int) -> ComponentReleaseDocument:
    """Draft skeleton from the project-wide template, hazards pre-filled from
    the component's recorded malfunctions."""
    if repo.find(component) is None:
        raise CompileError(f"unknown component {component}")
    malfunction_ids = {m.id for m in repo.malfunctions.values()
                       if m.component == component}
    hazards = sorted({hs.hazard for hs in repo.hazardous_scenarios.values()
                      if hs.malfunction in malfunction_ids and hs.hazard is not None})
    return ComponentReleaseDocument(
        id=RecordId(RecordKind.CRD, repo.next_serial(RecordKind.CRD)),
        component=component,
        stage=stage,
        hazards_caused=hazards,
    )
