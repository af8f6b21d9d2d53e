"""Every type invariant has a minimal passing fixture and a one-field
mutation that fails."""

import dataclasses

import pytest

from release_gate.fixtures import (
    CMP_LIFT,
    CMP_PERCEPTION,
    PRO_ELF,
)
from release_gate.model import (
    AsilLevel,
    Component,
    ComponentReleaseDocument,
    DecisionVerdict,
    Hazard,
    Malfunction,
    Measure,
    MeasureKind,
    MeasureStatus,
    MitigationStatus,
    OperatingMode,
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
    StageComposition,
    StageDefinition,
    SystemDocKind,
    TestEnvironment,
    TestRecord,
    Verdict,
    validate_record,
)


def _next(repo, kind):
    return RecordId(kind, repo.next_serial(kind))


def _passing_test(requirement):
    return TestRecord("T-X-01", [requirement], TestEnvironment.SIMULATION,
                      Verdict.PASS, 3)


CASES = {}


def case(name):
    def register(fn):
        CASES[name] = fn
        return fn
    return register


@case("prototype-granted-prefix")
def _(repo):
    record = Prototype(_next(repo, RecordKind.PRO), "demo", "demo", {1, 2})
    return record, lambda r: setattr(r, "granted_stages", {1, 3})


@case("stage-definition-mode")
def _(repo):
    record = StageDefinition(1, OperatingMode.MANUAL, "manual rides", "test site")
    return record, lambda r: setattr(r, "operating_mode", OperatingMode.AUTOMATED)


@case("malfunction-component-resolves")
def _(repo):
    record = Malfunction(_next(repo, RecordKind.MF), CMP_LIFT, "drops platform")
    return record, lambda r: setattr(r, "component", RecordId(RecordKind.CMP, 999))


@case("risk-parameters-ranges")
def _(repo):
    record = RiskParameters(3, 4, 3)
    return record, lambda r: object.__setattr__(r, "exposure", 5)


@case("hazardous-scenario-derived-levels")
def _(repo):
    hs = next(iter(repo.hazardous_scenarios.values()))
    record = dataclasses.replace(hs)

    def mutate(r):
        r.assessment = RiskAssessment(RiskParameters(3, 4, 3), AsilLevel.D, rsil=1)

    return record, mutate


@case("hazard-tested-requires-tested-measures")
def _(repo):
    record = Hazard(_next(repo, RecordKind.HZ), "hazard",
                    MitigationStatus.MEASURES_TESTED,
                    [Measure(MeasureKind.TECHNICAL, "m", MeasureStatus.TESTED, ["T-1"])])
    return record, lambda r: setattr(r.measures[0], "status", MeasureStatus.IMPLEMENTED)


@case("measure-tested-requires-evidence")
def _(repo):
    record = Measure(MeasureKind.TECHNICAL, "m", MeasureStatus.TESTED, ["T-1"])
    return record, lambda r: setattr(r, "verified_by", [])


@case("safety-goal-max-rsil")
def _(repo):
    goal = next(iter(repo.safety_goals.values()))
    record = dataclasses.replace(goal)
    return record, lambda r: setattr(r, "rsil", r.rsil + 1 if r.rsil < 4 else 0)


@case("requirement-parent-kind")
def _(repo):
    fsr = next(r for r in repo.requirements.values()
               if r.kind is RequirementKind.FUNCTIONAL)
    record = dataclasses.replace(fsr)
    return record, lambda r: setattr(r, "parent", next(
        t.id for t in repo.requirements.values()
        if t.kind is RequirementKind.TECHNICAL))


@case("technical-requirement-allocation")
def _(repo):
    tsr = next(r for r in repo.requirements.values()
               if r.kind is RequirementKind.TECHNICAL)
    record = dataclasses.replace(tsr, allocated_to=list(tsr.allocated_to))
    return record, lambda r: setattr(r, "allocated_to", [])


@case("requirement-inherits-parent-rsil")
def _(repo):
    tsr = next(r for r in repo.requirements.values()
               if r.kind is RequirementKind.TECHNICAL and r.inherited_rsil > 0)
    record = dataclasses.replace(tsr, allocated_to=list(tsr.allocated_to))
    return record, lambda r: setattr(r, "inherited_rsil", 0)


@case("component-developer-role")
def _(repo):
    record = Component(_next(repo, RecordKind.CMP), "new", "dev-lift", {PRO_ELF})
    return record, lambda r: setattr(r, "developer", "committee-chair")


@case("test-record-references-requirement")
def _(repo):
    tsr = next(r for r in repo.requirements.values()
               if r.kind is RequirementKind.TECHNICAL)
    record = _passing_test(tsr.id)
    return record, lambda r: setattr(r, "requirement_refs", [])


@case("crd-released-by-developer")
def _(repo):
    tsr = next(r for r in repo.requirements.values() if CMP_PERCEPTION in r.allocated_to)
    record = ComponentReleaseDocument(
        _next(repo, RecordKind.CRD), CMP_PERCEPTION, 3,
        functions_and_interfaces="f", subsystem_boundaries="b",
        fallback_mechanisms="fb", known_limitations="l",
        covered_requirements=[tsr.id], mitigation_strategies="m",
        test_records=[_passing_test(tsr.id)],
        release_status=ReleaseStatus.RELEASED, released_by="dev-perception")
    return record, lambda r: setattr(r, "released_by", "dev-lift")


@case("crd-released-requires-passing-tests")
def _(repo):
    tsr = next(r for r in repo.requirements.values() if CMP_PERCEPTION in r.allocated_to)
    record = ComponentReleaseDocument(
        _next(repo, RecordKind.CRD), CMP_PERCEPTION, 3,
        functions_and_interfaces="f", subsystem_boundaries="b",
        fallback_mechanisms="fb", known_limitations="l",
        covered_requirements=[tsr.id], mitigation_strategies="m",
        test_records=[_passing_test(tsr.id)],
        release_status=ReleaseStatus.RELEASED, released_by="dev-perception")
    return record, lambda r: setattr(r.test_records[0], "verdict", Verdict.FAIL)


@case("crd-transparency-fields-on-submission")
def _(repo):
    record = ComponentReleaseDocument(
        _next(repo, RecordKind.CRD), CMP_PERCEPTION, 3,
        functions_and_interfaces="f", subsystem_boundaries="b",
        fallback_mechanisms="fb", known_limitations="l",
        mitigation_strategies="m", release_status=ReleaseStatus.SUBMITTED)
    return record, lambda r: setattr(r, "known_limitations", "")


@case("system-doc-unique-per-kind-and-prototype")
def _(repo):
    existing = next(d for d in repo.system_docs.values()
                    if d.prototype == PRO_ELF and d.kind is SystemDocKind.SAFETY_PLAN)
    record = dataclasses.replace(existing)  # same id: not its own twin

    def mutate(r):
        r.id = _next(repo, RecordKind.SWD)  # now duplicates the stored SafetyPlan

    return record, mutate


@case("review-by-certification-agency")
def _(repo):
    record = ReviewRecord(_next(repo, RecordKind.RVW), PRO_ELF, 3,
                          Recommendation.FOR, "n", "auditor")
    return record, lambda r: setattr(r, "reviewer", "dev-lift")


@case("decision-by-release-committee")
def _(repo):
    record = ReleaseDecision(_next(repo, RecordKind.DEC), PRO_ELF, 3,
                             DecisionVerdict.GRANTED, "", "committee-chair")
    return record, lambda r: setattr(r, "decided_by", "auditor")


@case("composition-core-roles-from-stage-3")
def _(repo):
    composition = next(c for c in repo.compositions
                       if c.prototype == PRO_ELF and c.stage == 3)
    record = StageComposition(PRO_ELF, 3,
                              set(composition.required_system_docs),
                              set(composition.required_component_modules))
    return record, lambda r: r.required_component_modules.discard(CMP_PERCEPTION)


@pytest.mark.parametrize("name", sorted(CASES))
def test_minimal_fixture_passes_and_mutation_fails(name, records_only_repo):
    build = CASES[name]
    record, mutate = build(records_only_repo)
    assert validate_record(record, records_only_repo) == [], name
    mutate(record)
    violations = validate_record(record, records_only_repo)
    assert violations, f"{name}: mutation should violate an invariant"


def test_violation_lists_are_complete_not_first_only(records_only_repo):
    tsr = next(r for r in records_only_repo.requirements.values()
               if r.kind is RequirementKind.TECHNICAL)
    record = dataclasses.replace(tsr, allocated_to=[], inherited_rsil=tsr.inherited_rsil + 1
                                 if tsr.inherited_rsil < 4 else 0)
    violations = validate_record(record, records_only_repo)
    fields = {v.field for v in violations}
    assert "allocated_to" in fields and "inherited_rsil" in fields


def test_empty_allocation_violation_cites_rule(records_only_repo):
    tsr = next(r for r in records_only_repo.requirements.values()
               if r.kind is RequirementKind.TECHNICAL)
    record = dataclasses.replace(tsr, allocated_to=[])
    violations = validate_record(record, records_only_repo)
    assert len(violations) == 1
    assert violations[0].field == "allocated_to"
    assert "allocated" in violations[0].message
