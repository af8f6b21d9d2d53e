"""Domain records for the staged release process.

Every record kind shared by the store, the risk classifier, the workflow
engine, the validators, and the compiler is defined here, together with
``validate_record``, which reports structural invariant violations as data
instead of raising.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .store import Repository


class RecordKind(str, Enum):
    """The thirteen record-id prefixes."""

    HZ = "HZ"  # hazard
    OS = "OS"  # operational scenario
    MF = "MF"  # malfunction
    HS = "HS"  # hazardous scenario
    SG = "SG"  # safety goal
    FSR = "FSR"  # functional safety requirement
    TSR = "TSR"  # technical safety requirement
    CMP = "CMP"  # component
    CRD = "CRD"  # component release document
    SWD = "SWD"  # system-wide document
    RVW = "RVW"  # review record
    DEC = "DEC"  # release decision
    PRO = "PRO"  # prototype


_ID_PATTERN = re.compile(r"^([A-Z]+)-(\d{4})$")

MIN_SERIAL = 1
MAX_SERIAL = 9999  # four-digit zero padding keeps lexicographic == numeric order


@dataclass(frozen=True, order=True)
class RecordId:
    """Typed record identifier, rendered as ``<prefix>-<4-digit serial>``."""

    kind: RecordKind
    serial: int

    def __post_init__(self) -> None:
        if not isinstance(self.kind, RecordKind):
            raise ValueError(f"unknown record kind tag: {self.kind!r}")
        if not (MIN_SERIAL <= self.serial <= MAX_SERIAL):
            raise ValueError(
                f"record serial must be in {MIN_SERIAL}..{MAX_SERIAL}, got {self.serial}"
            )

    def render(self) -> str:
        return f"{self.kind.value}-{self.serial:04d}"

    def __str__(self) -> str:
        return self.render()

    @classmethod
    def parse(cls, text: str) -> "RecordId":
        m = _ID_PATTERN.match(text)
        if m is None:
            raise ValueError(f"malformed record id: {text!r}")
        prefix, serial = m.groups()
        try:
            kind = RecordKind(prefix)
        except ValueError:
            raise ValueError(f"unknown record kind tag: {prefix!r}") from None
        return cls(kind, int(serial))


class OperatingMode(str, Enum):
    MANUAL = "ManualOperation"
    AUTOMATED = "AutomatedOperation"


# Stages 1-2 are manually operated; 3-5 run the automated driving functions.
MANUAL_STAGES = frozenset({1, 2})
AUTOMATED_STAGES = frozenset({3, 4, 5})
ALL_STAGES = (1, 2, 3, 4, 5)


def is_stage_prefix(stages: set[int]) -> bool:
    """True when granting stage s implies every stage below s is granted."""
    return stages == set(range(1, len(stages) + 1))


@dataclass
class StageDefinition:
    """One incremental release stage and its permitted operating conditions."""

    number: int
    operating_mode: OperatingMode
    description: str
    operating_conditions: str


DEFAULT_STAGE_DEFINITIONS: tuple[StageDefinition, ...] = (
    StageDefinition(
        1,
        OperatingMode.MANUAL,
        "Manual controlled rides on test sites with speeds of up to approximately 5 km/h",
        "test site only; manual control; speed limited to approximately 5 km/h",
    ),
    StageDefinition(
        2,
        OperatingMode.MANUAL,
        "Manual controlled rides on test sites",
        "test site only; manual control",
    ),
    StageDefinition(
        3,
        OperatingMode.AUTOMATED,
        "Testing of (automated driving) functions that require safety drivers"
        " as a fallback level in a controlled environment",
        "controlled environment; safety driver present as fallback level",
    ),
    StageDefinition(
        4,
        OperatingMode.AUTOMATED,
        "Testing the demonstration without access for guests",
        "demonstration setting; no guest access",
    ),
    StageDefinition(
        5,
        OperatingMode.AUTOMATED,
        "Public demonstration on a test track",
        "public demonstration on a test track under the operating instructions",
    ),
)


@dataclass
class Prototype:
    id: RecordId
    name: str
    use_case: str
    granted_stages: set[int] = field(default_factory=set)


class ScenarioKind(str, Enum):
    VEHICLE_DYNAMIC = "VehicleDynamic"
    BOARDING = "Boarding"


@dataclass
class OperationalScenario:
    id: RecordId
    kind: ScenarioKind
    description: str


@dataclass
class Malfunction:
    id: RecordId
    component: RecordId
    description: str


@dataclass(frozen=True)
class RiskParameters:
    """Severity / exposure / controllability classes of a hazardous scenario."""

    severity: int  # S0..S3
    exposure: int  # E0..E4
    controllability: int  # C0..C3


class AsilLevel(IntEnum):
    """Automotive safety integrity level, totally ordered QM < A < B < C < D."""

    QM = 0
    A = 1
    B = 2
    C = 3
    D = 4


RSIL_RANGE = range(0, 5)


@dataclass(frozen=True)
class RiskAssessment:
    """Classified risk: the input classes plus the derived ASIL and RSIL."""

    parameters: RiskParameters
    asil: AsilLevel
    rsil: int


@dataclass
class HazardousScenario:
    """Coupling of an operational scenario with a component malfunction."""

    id: RecordId
    scenario: RecordId
    malfunction: RecordId
    hazard: RecordId | None = None
    assessment: RiskAssessment | None = None


class MitigationStatus(str, Enum):
    OPEN = "Open"
    MEASURES_DEFINED = "MeasuresDefined"
    MEASURES_IMPLEMENTED = "MeasuresImplemented"
    MEASURES_TESTED = "MeasuresTested"


class MeasureKind(str, Enum):
    TECHNICAL = "Technical"
    ORGANIZATIONAL = "Organizational"


class MeasureStatus(str, Enum):
    DEFINED = "Defined"
    IMPLEMENTED = "Implemented"
    TESTED = "Tested"


@dataclass
class Measure:
    kind: MeasureKind
    description: str
    status: MeasureStatus
    verified_by: list[str] = field(default_factory=list)  # test record ids


@dataclass
class Hazard:
    id: RecordId
    description: str
    mitigation_status: MitigationStatus = MitigationStatus.OPEN
    measures: list[Measure] = field(default_factory=list)


@dataclass
class SafetyGoal:
    id: RecordId
    hazard: RecordId
    statement: str
    rsil: int = 0


class RequirementKind(str, Enum):
    FUNCTIONAL = "Functional"
    TECHNICAL = "Technical"


@dataclass
class SafetyRequirement:
    """Functional (SG-parented) or technical (FSR-parented) safety requirement."""

    id: RecordId
    kind: RequirementKind
    parent: RecordId
    statement: str
    allocated_to: list[RecordId] = field(default_factory=list)
    inherited_rsil: int = 0


# Functional roles a component can be tagged with; the three core roles are
# mandatory in every composition from the first automated-operation stage on.
ROLE_ENVIRONMENT_PERCEPTION = "environment-perception"
ROLE_BEHAVIOR_PLANNING = "behavior-planning"
ROLE_MOTION_CONTROL = "motion-control"
CORE_AUTOMATION_ROLES = (
    ROLE_ENVIRONMENT_PERCEPTION,
    ROLE_BEHAVIOR_PLANNING,
    ROLE_MOTION_CONTROL,
)


@dataclass
class Component:
    id: RecordId
    name: str
    developer: str  # actor id
    prototypes: set[RecordId] = field(default_factory=set)
    roles: list[str] = field(default_factory=list)


class TestEnvironment(str, Enum):
    SIMULATION = "Simulation"
    FAULT_INJECTION = "FaultInjection"
    CLOSED_COURSE = "ClosedCourse"
    DEMONSTRATION_SCENARIO = "DemonstrationScenario"


class Verdict(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass
class TestRecord:
    id: str
    requirement_refs: list[RecordId]
    environment: TestEnvironment
    verdict: Verdict
    stage_context: int


class ReleaseStatus(str, Enum):
    DRAFT = "Draft"
    SUBMITTED = "Submitted"
    MISMATCH_FLAGGED = "MismatchFlagged"
    RELEASED = "Released"


# Template fields that must be filled in before a component release is
# submitted; the two transparency fields are additionally enforced as a
# structural invariant from status Submitted on.
CRD_MANDATORY_FIELDS = (
    "functions_and_interfaces",
    "subsystem_boundaries",
    "fallback_mechanisms",
    "known_limitations",
    "mitigation_strategies",
)
CRD_TRANSPARENCY_FIELDS = ("known_limitations", "fallback_mechanisms")


@dataclass
class ComponentReleaseDocument:
    """Developer-signed release module for one component at one stage."""

    id: RecordId
    component: RecordId
    stage: int
    functions_and_interfaces: str = ""
    subsystem_boundaries: str = ""
    fallback_mechanisms: str = ""
    known_limitations: str = ""
    hazards_caused: list[RecordId] = field(default_factory=list)
    covered_requirements: list[RecordId] = field(default_factory=list)
    mitigation_strategies: str = ""
    test_records: list[TestRecord] = field(default_factory=list)
    release_status: ReleaseStatus = ReleaseStatus.DRAFT
    released_by: str | None = None
    stale: bool = False


class SystemDocKind(str, Enum):
    SAFETY_PLAN = "SafetyPlan"
    ITEM_DEFINITION = "ItemDefinition"
    HARA = "HazardAnalysisRiskAssessment"
    FUNCTIONAL_SAFETY_CONCEPT = "FunctionalSafetyConcept"
    TECHNICAL_SAFETY_CONCEPT = "TechnicalSafetyConcept"
    SAFETY_CASE = "SafetyCase"
    OPERATING_INSTRUCTIONS = "OperatingInstructions"


class DocStatus(str, Enum):
    DRAFT = "Draft"
    ISSUED = "Issued"


@dataclass
class SystemWideDocument:
    id: RecordId
    prototype: RecordId
    kind: SystemDocKind
    content: str = ""
    status: DocStatus = DocStatus.DRAFT


class Recommendation(str, Enum):
    FOR = "For"
    AGAINST = "Against"


@dataclass
class ReviewRecord:
    id: RecordId
    prototype: RecordId
    stage: int
    recommendation: Recommendation
    notes: str
    reviewer: str  # actor id


class DecisionVerdict(str, Enum):
    GRANTED = "Granted"
    REJECTED = "Rejected"


@dataclass
class ReleaseDecision:
    id: RecordId
    prototype: RecordId
    stage: int
    verdict: DecisionVerdict
    conditions: str
    decided_by: str  # actor id


class Role(str, Enum):
    """The four process actors / swimlanes."""

    FUNCTION_DEVELOPER = "FunctionDeveloper"
    SAFETY_ENGINEER = "SafetyEngineer"
    CERTIFICATION_AGENCY = "CertificationAgency"
    RELEASE_COMMITTEE = "ReleaseCommittee"


@dataclass
class Actor:
    id: str
    role: Role
    name: str = ""


@dataclass
class StageComposition:
    """Required release modules for one prototype at one stage."""

    prototype: RecordId
    stage: int
    required_system_docs: set[SystemDocKind] = field(default_factory=set)
    required_component_modules: set[RecordId] = field(default_factory=set)


@dataclass(frozen=True)
class InvariantViolation:
    """One failed structural invariant; violations are data, not exceptions."""

    record: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.record}: {self.field}: {self.message}"


def _violate(out: list[InvariantViolation], record: Any, field_name: str, message: str) -> None:
    rid = getattr(record, "id", None)
    out.append(InvariantViolation(str(rid) if rid is not None else type(record).__name__,
                                  field_name, message))


def _check_ref(
    out: list[InvariantViolation],
    record: Any,
    field_name: str,
    ref: RecordId,
    kind: RecordKind,
    repo: "Repository | None",
) -> Any:
    """Kind + resolvability check for a single reference; returns the target."""
    if ref.kind is not kind:
        _violate(out, record, field_name, f"expected a {kind.value} reference, got {ref}")
        return None
    if repo is None:
        return None
    target = repo.find(ref)
    if target is None:
        _violate(out, record, field_name, f"reference {ref} does not resolve")
    return target


def _check_stage(out: list[InvariantViolation], record: Any, field_name: str, stage: int) -> None:
    if stage not in ALL_STAGES:
        _violate(out, record, field_name, f"stage must be in 1..5, got {stage}")


def _check_actor_role(
    out: list[InvariantViolation],
    record: Any,
    field_name: str,
    actor_id: str,
    role: Role,
    repo: "Repository | None",
) -> None:
    if repo is None:
        return
    actor = repo.actors.get(actor_id)
    if actor is None:
        _violate(out, record, field_name, f"actor {actor_id!r} does not resolve")
    elif actor.role is not role:
        _violate(out, record, field_name,
                 f"actor {actor_id!r} has role {actor.role.value}, requires {role.value}")


def validate_record(record: Any, repo: "Repository | None" = None) -> list[InvariantViolation]:
    """Check every structural invariant of ``record``.

    Returns the full list of violations (empty means valid). Referential
    checks resolve against ``repo`` when one is given.
    """
    out: list[InvariantViolation] = []

    if isinstance(record, Prototype):
        if not is_stage_prefix(set(record.granted_stages)):
            _violate(out, record, "granted_stages",
                     f"granted stages {sorted(record.granted_stages)} are not a prefix of 1..5")
        for s in record.granted_stages:
            _check_stage(out, record, "granted_stages", s)

    elif isinstance(record, StageDefinition):
        _check_stage(out, record, "number", record.number)
        if record.number in MANUAL_STAGES and record.operating_mode is not OperatingMode.MANUAL:
            _violate(out, record, "operating_mode",
                     f"stage {record.number} must use {OperatingMode.MANUAL.value}")
        if record.number in AUTOMATED_STAGES and record.operating_mode is not OperatingMode.AUTOMATED:
            _violate(out, record, "operating_mode",
                     f"stage {record.number} must use {OperatingMode.AUTOMATED.value}")

    elif isinstance(record, Malfunction):
        _check_ref(out, record, "component", record.component, RecordKind.CMP, repo)

    elif isinstance(record, RiskParameters):
        _validate_risk_parameters(record, out)

    elif isinstance(record, HazardousScenario):
        _check_ref(out, record, "scenario", record.scenario, RecordKind.OS, repo)
        _check_ref(out, record, "malfunction", record.malfunction, RecordKind.MF, repo)
        if record.hazard is not None:
            _check_ref(out, record, "hazard", record.hazard, RecordKind.HZ, repo)
        if record.assessment is not None:
            from .risk import asil_from_sec, rsil_from_asil

            _validate_risk_parameters(record.assessment.parameters, out, record)
            if not out:
                expected_asil = asil_from_sec(record.assessment.parameters)
                if record.assessment.asil is not expected_asil:
                    _violate(out, record, "assessment",
                             f"derived ASIL {record.assessment.asil.name} does not match"
                             f" classification {expected_asil.name}")
                elif record.assessment.rsil != rsil_from_asil(record.assessment.asil):
                    _violate(out, record, "assessment",
                             f"derived RSIL {record.assessment.rsil} does not match"
                             f" ASIL {record.assessment.asil.name}")

    elif isinstance(record, Hazard):
        if record.mitigation_status is MitigationStatus.MEASURES_TESTED:
            untested = [m.description for m in record.measures
                        if m.status is not MeasureStatus.TESTED]
            if untested:
                _violate(out, record, "mitigation_status",
                         f"status is MeasuresTested but {len(untested)} measure(s) are not Tested")
        for i, measure in enumerate(record.measures):
            if measure.status is MeasureStatus.TESTED and not measure.verified_by:
                _violate(out, record, f"measures[{i}].verified_by",
                         "Tested measure must reference at least one test record")

    elif isinstance(record, Measure):
        if record.status is MeasureStatus.TESTED and not record.verified_by:
            _violate(out, record, "verified_by",
                     "Tested measure must reference at least one test record")

    elif isinstance(record, SafetyGoal):
        hazard = _check_ref(out, record, "hazard", record.hazard, RecordKind.HZ, repo)
        if record.rsil not in RSIL_RANGE:
            _violate(out, record, "rsil", f"RSIL must be in 0..4, got {record.rsil}")
        elif repo is not None and hazard is not None:
            assessed = [hs.assessment.rsil for hs in repo.hazardous_scenarios.values()
                        if hs.hazard == record.hazard and hs.assessment is not None]
            if assessed and record.rsil != max(assessed):
                _violate(out, record, "rsil",
                         f"RSIL {record.rsil} does not equal the maximum ({max(assessed)})"
                         " over the hazard's assessed scenarios")

    elif isinstance(record, SafetyRequirement):
        if record.kind is RequirementKind.FUNCTIONAL:
            if record.id.kind is not RecordKind.FSR:
                _violate(out, record, "id", "functional requirements use the FSR prefix")
            parent = _check_ref(out, record, "parent", record.parent, RecordKind.SG, repo)
            parent_rsil = parent.rsil if parent is not None else None
        else:
            if record.id.kind is not RecordKind.TSR:
                _violate(out, record, "id", "technical requirements use the TSR prefix")
            parent = _check_ref(out, record, "parent", record.parent, RecordKind.FSR, repo)
            parent_rsil = parent.inherited_rsil if parent is not None else None
            if not record.allocated_to:
                _violate(out, record, "allocated_to",
                         "technical requirement must be allocated to at least one component")
        for ref in record.allocated_to:
            _check_ref(out, record, "allocated_to", ref, RecordKind.CMP, repo)
        if parent_rsil is not None and record.inherited_rsil != parent_rsil:
            _violate(out, record, "inherited_rsil",
                     f"inherited RSIL {record.inherited_rsil} does not equal"
                     f" the parent's RSIL {parent_rsil}")

    elif isinstance(record, Component):
        _check_actor_role(out, record, "developer", record.developer,
                          Role.FUNCTION_DEVELOPER, repo)
        for ref in record.prototypes:
            _check_ref(out, record, "prototypes", ref, RecordKind.PRO, repo)

    elif isinstance(record, TestRecord):
        if not record.requirement_refs:
            _violate(out, record, "requirement_refs",
                     "test record must reference at least one requirement")
        _check_stage(out, record, "stage_context", record.stage_context)
        for ref in record.requirement_refs:
            if ref.kind not in (RecordKind.FSR, RecordKind.TSR):
                _violate(out, record, "requirement_refs",
                         f"expected a requirement reference, got {ref}")
            elif repo is not None and repo.find(ref) is None:
                _violate(out, record, "requirement_refs", f"reference {ref} does not resolve")

    elif isinstance(record, ComponentReleaseDocument):
        component = _check_ref(out, record, "component", record.component, RecordKind.CMP, repo)
        _check_stage(out, record, "stage", record.stage)
        for ref in record.hazards_caused:
            _check_ref(out, record, "hazards_caused", ref, RecordKind.HZ, repo)
        for ref in record.covered_requirements:
            _check_ref(out, record, "covered_requirements", ref, RecordKind.TSR, repo)
        if record.release_status in (ReleaseStatus.SUBMITTED, ReleaseStatus.MISMATCH_FLAGGED,
                                     ReleaseStatus.RELEASED):
            for name in CRD_TRANSPARENCY_FIELDS:
                if not getattr(record, name).strip():
                    _violate(out, record, name,
                             f"transparency field {name} must be filled in before submission")
        if record.release_status is ReleaseStatus.RELEASED:
            if record.released_by is None:
                _violate(out, record, "released_by", "released document must name its releaser")
            elif component is not None and record.released_by != component.developer:
                _violate(out, record, "released_by",
                         f"release must be issued by the component's developer"
                         f" {component.developer!r}, not {record.released_by!r}")
            passed = {str(r) for t in record.test_records if t.verdict is Verdict.PASS
                      for r in t.requirement_refs}
            for ref in record.covered_requirements:
                if str(ref) not in passed:
                    _violate(out, record, "covered_requirements",
                             f"covered requirement {ref} has no passing test record")
        for i, test in enumerate(record.test_records):
            for violation in validate_record(test, repo):
                out.append(InvariantViolation(str(record.id),
                                              f"test_records[{i}].{violation.field}",
                                              violation.message))

    elif isinstance(record, SystemWideDocument):
        _check_ref(out, record, "prototype", record.prototype, RecordKind.PRO, repo)
        if repo is not None:
            twins = [d for d in repo.system_docs.values()
                     if d.prototype == record.prototype and d.kind is record.kind
                     and d.id != record.id]
            if twins:
                _violate(out, record, "kind",
                         f"duplicate {record.kind.value} document for {record.prototype}"
                         f" (also in {', '.join(sorted(str(d.id) for d in twins))})")

    elif isinstance(record, ReviewRecord):
        _check_ref(out, record, "prototype", record.prototype, RecordKind.PRO, repo)
        _check_stage(out, record, "stage", record.stage)
        _check_actor_role(out, record, "reviewer", record.reviewer,
                          Role.CERTIFICATION_AGENCY, repo)

    elif isinstance(record, ReleaseDecision):
        _check_ref(out, record, "prototype", record.prototype, RecordKind.PRO, repo)
        _check_stage(out, record, "stage", record.stage)
        _check_actor_role(out, record, "decided_by", record.decided_by,
                          Role.RELEASE_COMMITTEE, repo)

    elif isinstance(record, StageComposition):
        _check_ref(out, record, "prototype", record.prototype, RecordKind.PRO, repo)
        _check_stage(out, record, "stage", record.stage)
        for ref in record.required_component_modules:
            _check_ref(out, record, "required_component_modules", ref, RecordKind.CMP, repo)
        if repo is not None and record.stage in AUTOMATED_STAGES:
            covered = {role
                       for ref in record.required_component_modules
                       for role in getattr(repo.find(ref), "roles", [])}
            for role in CORE_AUTOMATION_ROLES:
                if role not in covered:
                    _violate(out, record, "required_component_modules",
                             f"automated-operation stage {record.stage} requires a component"
                             f" tagged {role!r}")

    elif isinstance(record, (OperationalScenario, Actor)):
        pass  # enum-valued fields are enforced at construction / parse time

    return out


def _validate_risk_parameters(
    params: RiskParameters,
    out: list[InvariantViolation],
    record: Any | None = None,
) -> None:
    subject = record if record is not None else params
    if params.severity not in range(0, 4):
        _violate(out, subject, "severity", f"severity class must be in 0..3, got {params.severity}")
    if params.exposure not in range(0, 5):
        _violate(out, subject, "exposure", f"exposure class must be in 0..4, got {params.exposure}")
    if params.controllability not in range(0, 4):
        _violate(out, subject, "controllability",
                 f"controllability class must be in 0..3, got {params.controllability}")
