"""Plain-text repository: one JSON file per record, an append-only NDJSON
event journal, and a repo.json carrying schema version and process
configuration (stage definitions, stage compositions).

Serialization is canonical: fixed key order per record schema, UTF-8, LF
line endings, one trailing newline, sets rendered as sorted lists. Saving
an unchanged repository is byte-identical; the journal is never rewritten.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

from .events import WorkflowEvent
from .model import (
    Actor,
    AsilLevel,
    Component,
    ComponentReleaseDocument,
    DEFAULT_STAGE_DEFINITIONS,
    DecisionVerdict,
    DocStatus,
    Hazard,
    HazardousScenario,
    Malfunction,
    Measure,
    MeasureKind,
    MeasureStatus,
    MitigationStatus,
    OperatingMode,
    OperationalScenario,
    Prototype,
    Recommendation,
    RecordId,
    RecordKind,
    ReleaseDecision,
    ReleaseStatus,
    RequirementKind,
    ReviewRecord,
    RiskAssessment,
    RiskParameters,
    Role,
    SafetyGoal,
    SafetyRequirement,
    ScenarioKind,
    StageComposition,
    StageDefinition,
    SystemDocKind,
    SystemWideDocument,
    TestEnvironment,
    TestRecord,
    Verdict,
)

SCHEMA_VERSION = 1

JOURNAL_FILE = "journal.ndjson"
CONFIG_FILE = "repo.json"
LOCK_FILE = ".lock"

RECORD_DIRS: dict[RecordKind, str] = {
    RecordKind.PRO: "prototypes",
    RecordKind.OS: "scenarios",
    RecordKind.MF: "malfunctions",
    RecordKind.HZ: "hazards",
    RecordKind.HS: "hazardous-scenarios",
    RecordKind.SG: "safety-goals",
    RecordKind.FSR: "requirements",
    RecordKind.TSR: "requirements",
    RecordKind.CMP: "components",
    RecordKind.CRD: "component-releases",
    RecordKind.SWD: "system-docs",
    RecordKind.RVW: "reviews",
    RecordKind.DEC: "decisions",
}
ACTORS_DIR = "actors"


class StoreError(Exception):
    """Base class for repository load/save failures."""


class ParseError(StoreError):
    def __init__(self, path: str, message: str, line: int | None = None,
                 field_name: str | None = None):
        self.path = path
        self.line = line
        self.field = field_name
        location = path
        if line is not None:
            location += f":{line}"
        if field_name is not None:
            location += f" field {field_name!r}"
        super().__init__(f"{location}: {message}")


class IntegrityError(StoreError):
    """All dangling references found in one pass, not just the first."""

    def __init__(self, offenders: list[str]):
        self.offenders = offenders
        super().__init__(
            "referential integrity violated:\n  " + "\n  ".join(offenders))


class LockError(StoreError):
    pass


class JournalError(StoreError):
    pass


def canonical_json_bytes(obj: Any) -> bytes:
    return (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Field-level decoding with file/field diagnostics

class _Fields:
    """Strict field reader over one decoded JSON object."""

    def __init__(self, path: str, obj: Any):
        if not isinstance(obj, dict):
            raise ParseError(path, "record must be a JSON object")
        self.path = path
        self.obj = obj
        self.seen: set[str] = set()

    def error(self, name: str, message: str) -> ParseError:
        return ParseError(self.path, message, field_name=name)

    def _get(self, name: str, required: bool = True) -> Any:
        self.seen.add(name)
        if name not in self.obj:
            if required:
                raise self.error(name, "missing required field")
            return None
        return self.obj[name]

    def str_(self, name: str, required: bool = True, default: str = "") -> str:
        value = self._get(name, required)
        if value is None:
            return default
        if not isinstance(value, str):
            raise self.error(name, f"expected a string, got {type(value).__name__}")
        return value

    def int_(self, name: str, required: bool = True, default: int = 0) -> int:
        value = self._get(name, required)
        if value is None:
            return default
        if not isinstance(value, int) or isinstance(value, bool):
            raise self.error(name, f"expected an integer, got {type(value).__name__}")
        return value

    def bool_(self, name: str, required: bool = False, default: bool = False) -> bool:
        value = self._get(name, required)
        if value is None:
            return default
        if not isinstance(value, bool):
            raise self.error(name, f"expected a boolean, got {type(value).__name__}")
        return value

    def id_(self, name: str, required: bool = True) -> RecordId | None:
        value = self._get(name, required)
        if value is None:
            return None
        try:
            return RecordId.parse(str(value))
        except ValueError as exc:
            raise self.error(name, str(exc)) from None

    def enum(self, name: str, enum_cls: Any, required: bool = True, default: Any = None) -> Any:
        value = self._get(name, required)
        if value is None:
            return default
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            raise self.error(name, f"unknown value {value!r}; expected one of: {allowed}") from None

    def list_(self, name: str, required: bool = False) -> list[Any]:
        value = self._get(name, required)
        if value is None:
            return []
        if not isinstance(value, list):
            raise self.error(name, f"expected a list, got {type(value).__name__}")
        return value

    def id_list(self, name: str, required: bool = False) -> list[RecordId]:
        out = []
        for item in self.list_(name, required):
            try:
                out.append(RecordId.parse(str(item)))
            except ValueError as exc:
                raise self.error(name, str(exc)) from None
        return out

    def int_list(self, name: str, required: bool = False) -> list[int]:
        out = []
        for item in self.list_(name, required):
            if not isinstance(item, int) or isinstance(item, bool):
                raise self.error(name, f"expected integers, got {item!r}")
            out.append(item)
        return out

    def str_list(self, name: str, required: bool = False) -> list[str]:
        out = []
        for item in self.list_(name, required):
            if not isinstance(item, str):
                raise self.error(name, f"expected strings, got {item!r}")
            out.append(item)
        return out

    def reject_unknown(self) -> None:
        unknown = sorted(set(self.obj) - self.seen)
        if unknown:
            raise ParseError(self.path, f"unknown field(s): {', '.join(unknown)}",
                             field_name=unknown[0])


# ---------------------------------------------------------------------------
# Per-kind codecs (dict key order is the canonical schema order)

def _ids(refs: Any) -> list[str]:
    return sorted(str(r) for r in refs)


def _encode_measure(m: Measure) -> dict[str, Any]:
    return {
        "kind": m.kind.value,
        "description": m.description,
        "status": m.status.value,
        "verified_by": list(m.verified_by),
    }


def _decode_measure(path: str, obj: Any, index: int) -> Measure:
    f = _Fields(path, obj)
    m = Measure(
        kind=f.enum("kind", MeasureKind),
        description=f.str_("description"),
        status=f.enum("status", MeasureStatus),
        verified_by=f.str_list("verified_by"),
    )
    f.reject_unknown()
    return m


def _encode_test_record(t: TestRecord) -> dict[str, Any]:
    return {
        "id": t.id,
        "requirement_refs": [str(r) for r in t.requirement_refs],
        "environment": t.environment.value,
        "verdict": t.verdict.value,
        "stage_context": t.stage_context,
    }


def _decode_test_record(path: str, obj: Any) -> TestRecord:
    f = _Fields(path, obj)
    t = TestRecord(
        id=f.str_("id"),
        requirement_refs=f.id_list("requirement_refs", required=True),
        environment=f.enum("environment", TestEnvironment),
        verdict=f.enum("verdict", Verdict),
        stage_context=f.int_("stage_context"),
    )
    f.reject_unknown()
    return t


def _encode_assessment(a: RiskAssessment | None) -> dict[str, Any] | None:
    if a is None:
        return None
    return {
        "severity": a.parameters.severity,
        "exposure": a.parameters.exposure,
        "controllability": a.parameters.controllability,
        "asil": a.asil.name,
        "rsil": a.rsil,
    }


def _decode_assessment(path: str, obj: Any) -> RiskAssessment | None:
    if obj is None:
        return None
    f = _Fields(path, obj)
    params = RiskParameters(
        severity=f.int_("severity"),
        exposure=f.int_("exposure"),
        controllability=f.int_("controllability"),
    )
    asil_name = f.str_("asil")
    try:
        asil = AsilLevel[asil_name]
    except KeyError:
        raise f.error("asil", f"unknown ASIL {asil_name!r}") from None
    a = RiskAssessment(parameters=params, asil=asil, rsil=f.int_("rsil"))
    f.reject_unknown()
    return a


def encode_record(record: Any) -> dict[str, Any]:
    if isinstance(record, Prototype):
        return {
            "id": str(record.id),
            "name": record.name,
            "use_case": record.use_case,
            "granted_stages": sorted(record.granted_stages),
        }
    if isinstance(record, OperationalScenario):
        return {"id": str(record.id), "kind": record.kind.value,
                "description": record.description}
    if isinstance(record, Malfunction):
        return {"id": str(record.id), "component": str(record.component),
                "description": record.description}
    if isinstance(record, Hazard):
        return {
            "id": str(record.id),
            "description": record.description,
            "mitigation_status": record.mitigation_status.value,
            "measures": [_encode_measure(m) for m in record.measures],
        }
    if isinstance(record, HazardousScenario):
        return {
            "id": str(record.id),
            "scenario": str(record.scenario),
            "malfunction": str(record.malfunction),
            "hazard": str(record.hazard) if record.hazard is not None else None,
            "assessment": _encode_assessment(record.assessment),
        }
    if isinstance(record, SafetyGoal):
        return {"id": str(record.id), "hazard": str(record.hazard),
                "statement": record.statement, "rsil": record.rsil}
    if isinstance(record, SafetyRequirement):
        return {
            "id": str(record.id),
            "kind": record.kind.value,
            "parent": str(record.parent),
            "statement": record.statement,
            "allocated_to": _ids(record.allocated_to),
            "inherited_rsil": record.inherited_rsil,
        }
    if isinstance(record, Component):
        return {
            "id": str(record.id),
            "name": record.name,
            "developer": record.developer,
            "prototypes": _ids(record.prototypes),
            "roles": sorted(record.roles),
        }
    if isinstance(record, ComponentReleaseDocument):
        return {
            "id": str(record.id),
            "component": str(record.component),
            "stage": record.stage,
            "functions_and_interfaces": record.functions_and_interfaces,
            "subsystem_boundaries": record.subsystem_boundaries,
            "fallback_mechanisms": record.fallback_mechanisms,
            "known_limitations": record.known_limitations,
            "hazards_caused": _ids(record.hazards_caused),
            "covered_requirements": _ids(record.covered_requirements),
            "mitigation_strategies": record.mitigation_strategies,
            "test_records": [_encode_test_record(t) for t in record.test_records],
            "release_status": record.release_status.value,
            "released_by": record.released_by,
            "stale": record.stale,
        }
    if isinstance(record, SystemWideDocument):
        return {
            "id": str(record.id),
            "prototype": str(record.prototype),
            "kind": record.kind.value,
            "content": record.content,
            "status": record.status.value,
        }
    if isinstance(record, ReviewRecord):
        return {
            "id": str(record.id),
            "prototype": str(record.prototype),
            "stage": record.stage,
            "recommendation": record.recommendation.value,
            "notes": record.notes,
            "reviewer": record.reviewer,
        }
    if isinstance(record, ReleaseDecision):
        return {
            "id": str(record.id),
            "prototype": str(record.prototype),
            "stage": record.stage,
            "verdict": record.verdict.value,
            "conditions": record.conditions,
            "decided_by": record.decided_by,
        }
    if isinstance(record, Actor):
        return {"id": record.id, "role": record.role.value, "name": record.name}
    raise TypeError(f"cannot encode {type(record).__name__}")


def _decode_prototype(path: str, obj: Any) -> Prototype:
    f = _Fields(path, obj)
    r = Prototype(
        id=f.id_("id"),
        name=f.str_("name"),
        use_case=f.str_("use_case", required=False),
        granted_stages=set(f.int_list("granted_stages")),
    )
    f.reject_unknown()
    return r


def _decode_scenario(path: str, obj: Any) -> OperationalScenario:
    f = _Fields(path, obj)
    r = OperationalScenario(id=f.id_("id"), kind=f.enum("kind", ScenarioKind),
                            description=f.str_("description"))
    f.reject_unknown()
    return r


def _decode_malfunction(path: str, obj: Any) -> Malfunction:
    f = _Fields(path, obj)
    r = Malfunction(id=f.id_("id"), component=f.id_("component"),
                    description=f.str_("description"))
    f.reject_unknown()
    return r


def _decode_hazard(path: str, obj: Any) -> Hazard:
    f = _Fields(path, obj)
    measures = [_decode_measure(path, m, i) for i, m in enumerate(f.list_("measures"))]
    r = Hazard(
        id=f.id_("id"),
        description=f.str_("description"),
        mitigation_status=f.enum("mitigation_status", MitigationStatus,
                                 required=False, default=MitigationStatus.OPEN),
        measures=measures,
    )
    f.reject_unknown()
    return r


def _decode_hazardous_scenario(path: str, obj: Any) -> HazardousScenario:
    f = _Fields(path, obj)
    hazard_raw = f._get("hazard", required=False)
    hazard = None
    if hazard_raw is not None:
        try:
            hazard = RecordId.parse(str(hazard_raw))
        except ValueError as exc:
            raise f.error("hazard", str(exc)) from None
    r = HazardousScenario(
        id=f.id_("id"),
        scenario=f.id_("scenario"),
        malfunction=f.id_("malfunction"),
        hazard=hazard,
        assessment=_decode_assessment(path, f._get("assessment", required=False)),
    )
    f.reject_unknown()
    return r


def _decode_safety_goal(path: str, obj: Any) -> SafetyGoal:
    f = _Fields(path, obj)
    r = SafetyGoal(id=f.id_("id"), hazard=f.id_("hazard"),
                   statement=f.str_("statement"), rsil=f.int_("rsil"))
    f.reject_unknown()
    return r


def _decode_requirement(path: str, obj: Any) -> SafetyRequirement:
    f = _Fields(path, obj)
    r = SafetyRequirement(
        id=f.id_("id"),
        kind=f.enum("kind", RequirementKind),
        parent=f.id_("parent"),
        statement=f.str_("statement"),
        allocated_to=f.id_list("allocated_to"),
        inherited_rsil=f.int_("inherited_rsil"),
    )
    f.reject_unknown()
    return r


def _decode_component(path: str, obj: Any) -> Component:
    f = _Fields(path, obj)
    r = Component(
        id=f.id_("id"),
        name=f.str_("name"),
        developer=f.str_("developer"),
        prototypes=set(f.id_list("prototypes")),
        roles=f.str_list("roles"),
    )
    f.reject_unknown()
    return r


def _decode_crd(path: str, obj: Any) -> ComponentReleaseDocument:
    f = _Fields(path, obj)
    tests = [_decode_test_record(path, t) for t in f.list_("test_records")]
    released_by = f._get("released_by", required=False)
    r = ComponentReleaseDocument(
        id=f.id_("id"),
        component=f.id_("component"),
        stage=f.int_("stage"),
        functions_and_interfaces=f.str_("functions_and_interfaces", required=False),
        subsystem_boundaries=f.str_("subsystem_boundaries", required=False),
        fallback_mechanisms=f.str_("fallback_mechanisms", required=False),
        known_limitations=f.str_("known_limitations", required=False),
        hazards_caused=f.id_list("hazards_caused"),
        covered_requirements=f.id_list("covered_requirements"),
        mitigation_strategies=f.str_("mitigation_strategies", required=False),
        test_records=tests,
        release_status=f.enum("release_status", ReleaseStatus,
                              required=False, default=ReleaseStatus.DRAFT),
        released_by=str(released_by) if released_by is not None else None,
        stale=f.bool_("stale"),
    )
    f.reject_unknown()
    return r


def _decode_system_doc(path: str, obj: Any) -> SystemWideDocument:
    f = _Fields(path, obj)
    r = SystemWideDocument(
        id=f.id_("id"),
        prototype=f.id_("prototype"),
        kind=f.enum("kind", SystemDocKind),
        content=f.str_("content", required=False),
        status=f.enum("status", DocStatus, required=False, default=DocStatus.DRAFT),
    )
    f.reject_unknown()
    return r


def _decode_review(path: str, obj: Any) -> ReviewRecord:
    f = _Fields(path, obj)
    r = ReviewRecord(
        id=f.id_("id"),
        prototype=f.id_("prototype"),
        stage=f.int_("stage"),
        recommendation=f.enum("recommendation", Recommendation),
        notes=f.str_("notes", required=False),
        reviewer=f.str_("reviewer"),
    )
    f.reject_unknown()
    return r


def _decode_decision(path: str, obj: Any) -> ReleaseDecision:
    f = _Fields(path, obj)
    r = ReleaseDecision(
        id=f.id_("id"),
        prototype=f.id_("prototype"),
        stage=f.int_("stage"),
        verdict=f.enum("verdict", DecisionVerdict),
        conditions=f.str_("conditions", required=False),
        decided_by=f.str_("decided_by"),
    )
    f.reject_unknown()
    return r


def _decode_actor(path: str, obj: Any) -> Actor:
    f = _Fields(path, obj)
    r = Actor(id=f.str_("id"), role=f.enum("role", Role), name=f.str_("name", required=False))
    f.reject_unknown()
    return r


_DECODERS: dict[RecordKind, Callable[[str, Any], Any]] = {
    RecordKind.PRO: _decode_prototype,
    RecordKind.OS: _decode_scenario,
    RecordKind.MF: _decode_malfunction,
    RecordKind.HZ: _decode_hazard,
    RecordKind.HS: _decode_hazardous_scenario,
    RecordKind.SG: _decode_safety_goal,
    RecordKind.FSR: _decode_requirement,
    RecordKind.TSR: _decode_requirement,
    RecordKind.CMP: _decode_component,
    RecordKind.CRD: _decode_crd,
    RecordKind.SWD: _decode_system_doc,
    RecordKind.RVW: _decode_review,
    RecordKind.DEC: _decode_decision,
}


def _encode_stage_definition(s: StageDefinition) -> dict[str, Any]:
    return {
        "number": s.number,
        "operating_mode": s.operating_mode.value,
        "description": s.description,
        "operating_conditions": s.operating_conditions,
    }


def _decode_stage_definition(path: str, obj: Any) -> StageDefinition:
    f = _Fields(path, obj)
    r = StageDefinition(
        number=f.int_("number"),
        operating_mode=f.enum("operating_mode", OperatingMode),
        description=f.str_("description"),
        operating_conditions=f.str_("operating_conditions", required=False),
    )
    f.reject_unknown()
    return r


def _encode_composition(c: StageComposition) -> dict[str, Any]:
    return {
        "prototype": str(c.prototype),
        "stage": c.stage,
        "required_system_docs": sorted(k.value for k in c.required_system_docs),
        "required_component_modules": _ids(c.required_component_modules),
    }


def _decode_composition(path: str, obj: Any) -> StageComposition:
    f = _Fields(path, obj)
    docs = set()
    for value in f.str_list("required_system_docs"):
        try:
            docs.add(SystemDocKind(value))
        except ValueError:
            raise f.error("required_system_docs", f"unknown document kind {value!r}") from None
    r = StageComposition(
        prototype=f.id_("prototype"),
        stage=f.int_("stage"),
        required_system_docs=docs,
        required_component_modules=set(f.id_list("required_component_modules")),
    )
    f.reject_unknown()
    return r


# ---------------------------------------------------------------------------
# Repository

@dataclass
class Repository:
    """In-memory snapshot of a record repository plus its event journal."""

    root: Path | None = None
    schema_version: int = SCHEMA_VERSION
    stage_definitions: list[StageDefinition] = field(
        default_factory=lambda: [StageDefinition(s.number, s.operating_mode, s.description,
                                                 s.operating_conditions)
                                 for s in DEFAULT_STAGE_DEFINITIONS])
    compositions: list[StageComposition] = field(default_factory=list)
    prototypes: dict[RecordId, Prototype] = field(default_factory=dict)
    scenarios: dict[RecordId, OperationalScenario] = field(default_factory=dict)
    malfunctions: dict[RecordId, Malfunction] = field(default_factory=dict)
    hazards: dict[RecordId, Hazard] = field(default_factory=dict)
    hazardous_scenarios: dict[RecordId, HazardousScenario] = field(default_factory=dict)
    safety_goals: dict[RecordId, SafetyGoal] = field(default_factory=dict)
    requirements: dict[RecordId, SafetyRequirement] = field(default_factory=dict)
    components: dict[RecordId, Component] = field(default_factory=dict)
    component_releases: dict[RecordId, ComponentReleaseDocument] = field(default_factory=dict)
    system_docs: dict[RecordId, SystemWideDocument] = field(default_factory=dict)
    reviews: dict[RecordId, ReviewRecord] = field(default_factory=dict)
    decisions: dict[RecordId, ReleaseDecision] = field(default_factory=dict)
    actors: dict[str, Actor] = field(default_factory=dict)
    journal: list[WorkflowEvent] = field(default_factory=list)
    journal_persisted: int = 0

    def _map_for(self, kind: RecordKind) -> dict[RecordId, Any]:
        return {
            RecordKind.PRO: self.prototypes,
            RecordKind.OS: self.scenarios,
            RecordKind.MF: self.malfunctions,
            RecordKind.HZ: self.hazards,
            RecordKind.HS: self.hazardous_scenarios,
            RecordKind.SG: self.safety_goals,
            RecordKind.FSR: self.requirements,
            RecordKind.TSR: self.requirements,
            RecordKind.CMP: self.components,
            RecordKind.CRD: self.component_releases,
            RecordKind.SWD: self.system_docs,
            RecordKind.RVW: self.reviews,
            RecordKind.DEC: self.decisions,
        }[kind]

    def find(self, record_id: RecordId) -> Any | None:
        return self._map_for(record_id.kind).get(record_id)

    def add(self, record: Any) -> Any:
        mapping = self._map_for(record.id.kind)
        if record.id in mapping:
            raise ValueError(f"duplicate record id: {record.id}")
        mapping[record.id] = record
        return record

    def remove(self, record_id: RecordId) -> None:
        self._map_for(record_id.kind).pop(record_id, None)

    def next_serial(self, kind: RecordKind) -> int:
        taken = [rid.serial for rid in self._map_for(kind) if rid.kind is kind]
        return max(taken, default=0) + 1

    def iter_records(self) -> Iterator[Any]:
        for mapping in (self.prototypes, self.scenarios, self.malfunctions, self.hazards,
                        self.hazardous_scenarios, self.safety_goals, self.requirements,
                        self.components, self.component_releases, self.system_docs,
                        self.reviews, self.decisions):
            for key in sorted(mapping):
                yield mapping[key]

    def stage_definition(self, number: int) -> StageDefinition | None:
        for stage in self.stage_definitions:
            if stage.number == number:
                return stage
        return None

    def composition_for(self, prototype: RecordId, stage: int) -> StageComposition | None:
        for comp in self.compositions:
            if comp.prototype == prototype and comp.stage == stage:
                return comp
        return None

    def releases_for(self, component: RecordId, stage: int | None = None
                     ) -> list[ComponentReleaseDocument]:
        out = [crd for crd in self.component_releases.values()
               if crd.component == component and (stage is None or crd.stage == stage)]
        return sorted(out, key=lambda c: c.id)

    def test_record_index(self) -> dict[str, list[tuple[RecordId, TestRecord]]]:
        """Test records live inside component releases; index them by test id."""
        index: dict[str, list[tuple[RecordId, TestRecord]]] = {}
        for crd_id in sorted(self.component_releases):
            for test in self.component_releases[crd_id].test_records:
                index.setdefault(test.id, []).append((crd_id, test))
        return index

    def append_event(self, event: WorkflowEvent) -> None:
        expected = len(self.journal) + 1
        if event.seq != expected:
            raise JournalError(f"event seq {event.seq} breaks contiguity, expected {expected}")
        self.journal.append(event)


def _referenced_ids(record: Any) -> list[tuple[str, RecordId]]:
    refs: list[tuple[str, RecordId]] = []
    if isinstance(record, Malfunction):
        refs.append(("component", record.component))
    elif isinstance(record, HazardousScenario):
        refs.append(("scenario", record.scenario))
        refs.append(("malfunction", record.malfunction))
        if record.hazard is not None:
            refs.append(("hazard", record.hazard))
    elif isinstance(record, SafetyGoal):
        refs.append(("hazard", record.hazard))
    elif isinstance(record, SafetyRequirement):
        refs.append(("parent", record.parent))
        refs.extend(("allocated_to", r) for r in record.allocated_to)
    elif isinstance(record, Component):
        refs.extend(("prototypes", r) for r in sorted(record.prototypes))
    elif isinstance(record, ComponentReleaseDocument):
        refs.append(("component", record.component))
        refs.extend(("hazards_caused", r) for r in record.hazards_caused)
        refs.extend(("covered_requirements", r) for r in record.covered_requirements)
        for test in record.test_records:
            refs.extend(("test_records", r) for r in test.requirement_refs)
    elif isinstance(record, SystemWideDocument):
        refs.append(("prototype", record.prototype))
    elif isinstance(record, (ReviewRecord, ReleaseDecision)):
        refs.append(("prototype", record.prototype))
    return refs


def _referenced_actors(record: Any) -> list[tuple[str, str]]:
    if isinstance(record, Component):
        return [("developer", record.developer)]
    if isinstance(record, ReviewRecord):
        return [("reviewer", record.reviewer)]
    if isinstance(record, ReleaseDecision):
        return [("decided_by", record.decided_by)]
    if isinstance(record, ComponentReleaseDocument) and record.released_by is not None:
        return [("released_by", record.released_by)]
    return []


def check_integrity(repo: Repository) -> list[str]:
    """Collect every dangling reference across the repository."""
    offenders: list[str] = []
    for record in repo.iter_records():
        for field_name, ref in _referenced_ids(record):
            if repo.find(ref) is None:
                offenders.append(f"{record.id}.{field_name} -> {ref} (missing)")
        for field_name, actor_id in _referenced_actors(record):
            if actor_id not in repo.actors:
                offenders.append(f"{record.id}.{field_name} -> actor {actor_id!r} (missing)")
    for comp in repo.compositions:
        subject = f"composition {comp.prototype}/stage {comp.stage}"
        if repo.find(comp.prototype) is None:
            offenders.append(f"{subject}.prototype -> {comp.prototype} (missing)")
        for ref in sorted(comp.required_component_modules):
            if repo.find(ref) is None:
                offenders.append(f"{subject}.required_component_modules -> {ref} (missing)")
    for event in repo.journal:
        if event.actor and event.actor not in repo.actors:
            offenders.append(f"journal seq {event.seq}.actor -> actor {event.actor!r} (missing)")
    return offenders


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.msg, line=exc.lineno) from None


def load(root: str | Path) -> Repository:
    """Parse a repository from disk with strict validation.

    Raises ParseError for malformed files, IntegrityError listing every
    dangling reference, and StoreError for missing structure.
    """
    root = Path(root)
    if not root.is_dir():
        raise StoreError(f"repository root {root} does not exist")
    config_path = root / CONFIG_FILE
    if not config_path.is_file():
        raise StoreError(f"{root} is not a record repository ({CONFIG_FILE} missing)")

    config = _read_json(config_path)
    f = _Fields(str(config_path), config)
    schema_version = f.int_("schema_version")
    if schema_version > SCHEMA_VERSION:
        raise ParseError(str(config_path),
                         f"repository schema_version {schema_version} is newer than"
                         f" supported version {SCHEMA_VERSION}",
                         field_name="schema_version")
    stage_definitions = [_decode_stage_definition(str(config_path), s)
                         for s in f.list_("stage_definitions")]
    compositions = [_decode_composition(str(config_path), c)
                    for c in f.list_("compositions")]
    f.reject_unknown()

    repo = Repository(root=root, schema_version=schema_version,
                      stage_definitions=stage_definitions, compositions=compositions)

    for dir_name in sorted(set(RECORD_DIRS.values())):
        directory = root / dir_name
        if not directory.is_dir():
            continue
        for path in sorted(directory.glob("*.json")):
            obj = _read_json(path)
            try:
                file_id = RecordId.parse(path.stem)
            except ValueError as exc:
                raise ParseError(str(path), str(exc)) from None
            if RECORD_DIRS[file_id.kind] != dir_name:
                raise ParseError(str(path),
                                 f"record {file_id} does not belong in {dir_name}/")
            record = _DECODERS[file_id.kind](str(path), obj)
            if record.id != file_id:
                raise ParseError(str(path),
                                 f"file name {path.stem} does not match record id {record.id}",
                                 field_name="id")
            try:
                repo.add(record)
            except ValueError as exc:
                raise ParseError(str(path), str(exc), field_name="id") from None

    actors_dir = root / ACTORS_DIR
    if actors_dir.is_dir():
        for path in sorted(actors_dir.glob("*.json")):
            actor = _decode_actor(str(path), _read_json(path))
            if actor.id != path.stem:
                raise ParseError(str(path),
                                 f"file name {path.stem} does not match actor id {actor.id}",
                                 field_name="id")
            if actor.id in repo.actors:
                raise ParseError(str(path), f"duplicate actor id: {actor.id}", field_name="id")
            repo.actors[actor.id] = actor

    journal_path = root / JOURNAL_FILE
    if journal_path.is_file():
        with journal_path.open(encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = WorkflowEvent.from_line(line)
                except (ValueError, json.JSONDecodeError) as exc:
                    raise ParseError(str(journal_path), str(exc), line=lineno) from None
                expected = len(repo.journal) + 1
                if event.seq != expected:
                    raise ParseError(str(journal_path),
                                     f"event seq {event.seq} breaks contiguity,"
                                     f" expected {expected}", line=lineno)
                repo.journal.append(event)
    repo.journal_persisted = len(repo.journal)

    offenders = check_integrity(repo)
    if offenders:
        raise IntegrityError(offenders)
    return repo


def _write_if_changed(path: Path, data: bytes) -> bool:
    if path.is_file() and path.read_bytes() == data:
        return False
    path.write_bytes(data)
    return True


class repository_lock:
    """Advisory single-writer lock (lock file with O_EXCL semantics)."""

    def __init__(self, root: Path):
        self.path = root / LOCK_FILE

    def __enter__(self) -> "repository_lock":
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(f"repository is locked by another writer ({self.path})") from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info: Any) -> None:
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass


def save(repo: Repository) -> list[Path]:
    """Write the repository canonically; returns the paths that changed.

    Record files are rewritten only when their canonical bytes differ; files
    for records that no longer exist are removed. The journal is strictly
    append-only.
    """
    if repo.root is None:
        raise StoreError("repository has no root path")
    root = repo.root
    root.mkdir(parents=True, exist_ok=True)
    changed: list[Path] = []

    with repository_lock(root):
        config = {
            "schema_version": repo.schema_version,
            "stage_definitions": [_encode_stage_definition(s)
                                  for s in sorted(repo.stage_definitions,
                                                  key=lambda s: s.number)],
            "compositions": [_encode_composition(c)
                             for c in sorted(repo.compositions,
                                             key=lambda c: (c.prototype, c.stage))],
        }
        if _write_if_changed(root / CONFIG_FILE, canonical_json_bytes(config)):
            changed.append(root / CONFIG_FILE)

        expected_files: dict[Path, set[str]] = {}
        for dir_name in sorted(set(RECORD_DIRS.values())) + [ACTORS_DIR]:
            directory = root / dir_name
            directory.mkdir(exist_ok=True)
            expected_files[directory] = set()

        for record in repo.iter_records():
            directory = root / RECORD_DIRS[record.id.kind]
            name = f"{record.id}.json"
            expected_files[directory].add(name)
            if _write_if_changed(directory / name, canonical_json_bytes(encode_record(record))):
                changed.append(directory / name)
        for actor_id in sorted(repo.actors):
            directory = root / ACTORS_DIR
            name = f"{actor_id}.json"
            expected_files[directory].add(name)
            data = canonical_json_bytes(encode_record(repo.actors[actor_id]))
            if _write_if_changed(directory / name, data):
                changed.append(directory / name)

        for directory, names in expected_files.items():
            for path in directory.glob("*.json"):
                if path.name not in names:
                    path.unlink()
                    changed.append(path)

        journal_path = root / JOURNAL_FILE
        existing = 0
        if journal_path.is_file():
            with journal_path.open(encoding="utf-8") as handle:
                existing = sum(1 for line in handle if line.strip())
        if existing > len(repo.journal):
            raise JournalError(
                f"journal on disk has {existing} events but snapshot has"
                f" {len(repo.journal)}; the journal is append-only")
        if existing < len(repo.journal):
            with journal_path.open("a", encoding="utf-8", newline="\n") as handle:
                for event in repo.journal[existing:]:
                    handle.write(event.to_line() + "\n")
            changed.append(journal_path)
        elif not journal_path.is_file():
            journal_path.touch()
        repo.journal_persisted = len(repo.journal)

    return changed


def init(root: str | Path, stage_definitions: list[StageDefinition] | None = None) -> Repository:
    """Create a fresh repository skeleton at ``root``."""
    root = Path(root)
    if (root / CONFIG_FILE).exists():
        raise StoreError(f"{root} already contains a repository")
    repo = Repository(root=root)
    if stage_definitions is not None:
        repo.stage_definitions = stage_definitions
    save(repo)
    return repo
