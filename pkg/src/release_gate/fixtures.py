"""Demo project: four prototypes sharing an automation platform, with the
autoELF walkthrough that advances through all five release stages.

The builder constructs every record first and then drives the workflow
exclusively through the engine, so the resulting journal respects every
gate. Timestamps come from a fixed logical clock; building the same demo
twice yields byte-identical repositories.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

from .engine import ProcessEngine
from .events import EventKind
from .model import (
    Actor,
    Component,
    ComponentReleaseDocument,
    DecisionVerdict,
    DocStatus,
    Hazard,
    HazardousScenario,
    Malfunction,
    Measure,
    MeasureKind,
    MeasureStatus,
    MitigationStatus,
    OperationalScenario,
    Prototype,
    Recommendation,
    RecordId,
    RecordKind,
    RequirementKind,
    ReleaseStatus,
    RiskParameters,
    Role,
    SafetyGoal,
    SafetyRequirement,
    ScenarioKind,
    StageComposition,
    SystemDocKind,
    SystemWideDocument,
    TestEnvironment,
    TestRecord,
    Verdict,
)
from .risk import classify
from .store import Repository

PRO_SHUTTLE = RecordId(RecordKind.PRO, 1)
PRO_TAXI = RecordId(RecordKind.PRO, 2)
PRO_ELF = RecordId(RecordKind.PRO, 3)
PRO_CARGO = RecordId(RecordKind.PRO, 4)

CMP_PLATFORM = RecordId(RecordKind.CMP, 1)
CMP_PERCEPTION = RecordId(RecordKind.CMP, 2)
CMP_PLANNING = RecordId(RecordKind.CMP, 3)
CMP_MOTION = RecordId(RecordKind.CMP, 4)
CMP_LIFT = RecordId(RecordKind.CMP, 5)

SAFETY_LEAD = "safety-lead"
AUDITOR = "auditor"
COMMITTEE = "committee-chair"

_COMPONENT_TAGS = {
    CMP_PLATFORM: "PLT",
    CMP_PERCEPTION: "PER",
    CMP_PLANNING: "PLN",
    CMP_MOTION: "MOT",
    CMP_LIFT: "LFT",
}

_STAGE_TEST_ENVS = {
    1: (TestEnvironment.CLOSED_COURSE,),
    2: (TestEnvironment.CLOSED_COURSE,),
    3: (TestEnvironment.SIMULATION, TestEnvironment.CLOSED_COURSE),
    4: (TestEnvironment.FAULT_INJECTION, TestEnvironment.DEMONSTRATION_SCENARIO),
    5: (TestEnvironment.DEMONSTRATION_SCENARIO,),
}


def _ticking_clock(start: str = "2023-05-15T08:00:00+00:00"):
    moment = datetime.fromisoformat(start)
    tick = timedelta(minutes=1)

    def clock() -> str:
        nonlocal moment
        moment += tick
        return moment.astimezone(timezone.utc).isoformat(timespec="seconds")

    return clock


def _crd_tests(component: RecordId, stage: int,
               requirement: RecordId) -> list[TestRecord]:
    tag = _COMPONENT_TAGS[component]
    return [
        TestRecord(
            id=f"T-{tag}-S{stage}-{i:02d}",
            requirement_refs=[requirement],
            environment=env,
            verdict=Verdict.PASS,
            stage_context=stage,
        )
        for i, env in enumerate(_STAGE_TEST_ENVS[stage], start=1)
    ]


def _crd(serial: int, component: RecordId, stage: int, name: str,
         requirement: RecordId, hazards: list[RecordId]) -> ComponentReleaseDocument:
    return ComponentReleaseDocument(
        id=RecordId(RecordKind.CRD, serial),
        component=component,
        stage=stage,
        functions_and_interfaces=(
            f"{name}: functional scope and signal interfaces for stage-{stage}"
            " operation, including the supervision heartbeat."),
        subsystem_boundaries=(
            f"{name} boundary towards the platform data backbone and the"
            " safety supervisor."),
        fallback_mechanisms=(
            "On internal fault detection the component requests a safe halt"
            " and latches its outputs to the neutral state."),
        known_limitations=(
            f"Validated only for the stage-{stage} operating conditions;"
            " degraded weather performance is untested."),
        hazards_caused=list(hazards),
        covered_requirements=[requirement],
        mitigation_strategies=(
            "Requirement-driven design with redundancy where allocated;"
            " residual risk addressed by organizational measures."),
        test_records=_crd_tests(component, stage, requirement),
    )


def _system_docs(repo: Repository) -> None:
    contents = {
        SystemDocKind.SAFETY_PLAN: (
            "Coordination of the safety assurance activities: schedule,"
            " responsibilities, and confirmation measures."),
        SystemDocKind.ITEM_DEFINITION: (
            "System description of the prototype, its operational scope,"
            " and the demonstration environment."),
        SystemDocKind.HARA: (
            "Hazard analysis and risk assessment over the representative"
            " vehicle dynamic and boarding scenarios."),
        SystemDocKind.FUNCTIONAL_SAFETY_CONCEPT: (
            "Functional safety requirements derived from the safety goals,"
            " with assumptions on the operating conditions."),
        SystemDocKind.TECHNICAL_SAFETY_CONCEPT: (
            "Technical safety requirements allocated to components, with"
            " links to the component release documentation."),
        SystemDocKind.SAFETY_CASE: (
            "Argument that the gathered development evidence supports the"
            " top-level claim for the demonstration."),
        SystemDocKind.OPERATING_INSTRUCTIONS: (
            "Incident procedures, role assignments for track marshals and"
            " the safety watch, and the demonstration routes."),
    }
    serial = 1
    for prototype in (PRO_SHUTTLE, PRO_TAXI, PRO_ELF, PRO_CARGO):
        for kind in SystemDocKind:
            repo.add(SystemWideDocument(
                id=RecordId(RecordKind.SWD, serial),
                prototype=prototype,
                kind=kind,
                content=contents[kind],
                status=DocStatus.ISSUED,
            ))
            serial += 1


def _compositions(repo: Repository) -> None:
    base_docs = {SystemDocKind.SAFETY_PLAN, SystemDocKind.ITEM_DEFINITION,
                 SystemDocKind.HARA}
    concept_docs = base_docs | {SystemDocKind.FUNCTIONAL_SAFETY_CONCEPT,
                                SystemDocKind.TECHNICAL_SAFETY_CONCEPT}
    rehearsal_docs = concept_docs | {SystemDocKind.OPERATING_INSTRUCTIONS}
    full_docs = rehearsal_docs | {SystemDocKind.SAFETY_CASE}
    automation = {CMP_PLATFORM, CMP_PERCEPTION, CMP_PLANNING, CMP_MOTION}

    for prototype in (PRO_SHUTTLE, PRO_TAXI, PRO_ELF, PRO_CARGO):
        for stage in (1, 2):
            repo.compositions.append(StageComposition(
                prototype=prototype, stage=stage,
                required_system_docs=set(base_docs),
                required_component_modules={CMP_PLATFORM}))
        repo.compositions.append(StageComposition(
            prototype=prototype, stage=3,
            required_system_docs=set(concept_docs),
            required_component_modules=set(automation)))
        repo.compositions.append(StageComposition(
            prototype=prototype, stage=4,
            required_system_docs=set(rehearsal_docs),
            required_component_modules=set(automation)))
        stage5_components = set(automation)
        if prototype == PRO_ELF:
            stage5_components.add(CMP_LIFT)
        repo.compositions.append(StageComposition(
            prototype=prototype, stage=5,
            required_system_docs=set(full_docs),
            required_component_modules=stage5_components))


def build_records(root: Path | None = None) -> Repository:
    """All records of the demo project, before any workflow event."""
    repo = Repository(root=Path(root) if root is not None else None)

    for actor in (
        Actor("dev-platform", Role.FUNCTION_DEVELOPER, "Platform development"),
        Actor("dev-perception", Role.FUNCTION_DEVELOPER, "Perception development"),
        Actor("dev-planning", Role.FUNCTION_DEVELOPER, "Planning development"),
        Actor("dev-motion", Role.FUNCTION_DEVELOPER, "Motion control development"),
        Actor("dev-lift", Role.FUNCTION_DEVELOPER, "Boarding systems development"),
        Actor(SAFETY_LEAD, Role.SAFETY_ENGINEER, "System safety team"),
        Actor(AUDITOR, Role.CERTIFICATION_AGENCY, "External certification agency"),
        Actor(COMMITTEE, Role.RELEASE_COMMITTEE, "Release committee"),
    ):
        repo.actors[actor.id] = actor

    repo.add(Prototype(PRO_SHUTTLE, "autoSHUTTLE", "People mover for urban districts"))
    repo.add(Prototype(PRO_TAXI, "autoTAXI", "On-demand urban cab"))
    repo.add(Prototype(PRO_ELF, "autoELF",
                       "Autonomous family vehicle with barrier-free boarding"))
    repo.add(Prototype(PRO_CARGO, "autoCARGO", "Automated goods delivery"))

    everyone = {PRO_SHUTTLE, PRO_TAXI, PRO_ELF, PRO_CARGO}
    repo.add(Component(CMP_PLATFORM, "vehicle platform", "dev-platform",
                       set(everyone), ["vehicle-platform"]))
    repo.add(Component(CMP_PERCEPTION, "environment perception", "dev-perception",
                       set(everyone), ["environment-perception"]))
    repo.add(Component(CMP_PLANNING, "behavior planning", "dev-planning",
                       set(everyone), ["behavior-planning"]))
    repo.add(Component(CMP_MOTION, "motion control", "dev-motion",
                       set(everyone), ["motion-control"]))
    repo.add(Component(CMP_LIFT, "boarding assistance (lift)", "dev-lift",
                       {PRO_ELF}, ["boarding-assistance"]))

    os1 = repo.add(OperationalScenario(
        RecordId(RecordKind.OS, 1), ScenarioKind.VEHICLE_DYNAMIC,
        "Straight travel along the demonstration route with spectators behind barriers"))
    os2 = repo.add(OperationalScenario(
        RecordId(RecordKind.OS, 2), ScenarioKind.VEHICLE_DYNAMIC,
        "Low-speed turning maneuver at the turning point of the route"))
    os3 = repo.add(OperationalScenario(
        RecordId(RecordKind.OS, 3), ScenarioKind.BOARDING,
        "Passengers board and alight at the stop, including lift platform use"))

    mf1 = repo.add(Malfunction(RecordId(RecordKind.MF, 1), CMP_PERCEPTION,
                               "Object detection misses an obstacle in the corridor"))
    mf2 = repo.add(Malfunction(RecordId(RecordKind.MF, 2), CMP_PLANNING,
                               "Planned trajectory leaves the cleared corridor"))
    mf3 = repo.add(Malfunction(RecordId(RecordKind.MF, 3), CMP_MOTION,
                               "Unintended acceleration or missing braking response"))
    mf4 = repo.add(Malfunction(RecordId(RecordKind.MF, 4), CMP_LIFT,
                               "Lift platform moves while a passenger is boarding"))
    mf5 = repo.add(Malfunction(RecordId(RecordKind.MF, 5), CMP_LIFT,
                               "Lift interlock reports stowed while the platform is deployed"))
    mf6 = repo.add(Malfunction(RecordId(RecordKind.MF, 6), CMP_PLATFORM,
                               "Loss of the low-voltage supply during operation"))

    hz1 = repo.add(Hazard(
        RecordId(RecordKind.HZ, 1),
        "Collision with a person in the driving corridor",
        MitigationStatus.MEASURES_TESTED,
        [Measure(MeasureKind.TECHNICAL,
                 "Redundant object detection channel with cross-check",
                 MeasureStatus.TESTED, ["T-PER-S4-01"]),
         Measure(MeasureKind.ORGANIZATIONAL,
                 "Track marshals with radio emergency stop along the corridor",
                 MeasureStatus.TESTED, ["T-PLT-S4-02"])]))
    hz2 = repo.add(Hazard(
        RecordId(RecordKind.HZ, 2),
        "Leaving the cleared corridor and colliding with infrastructure",
        MitigationStatus.MEASURES_TESTED,
        [Measure(MeasureKind.TECHNICAL,
                 "Corridor geofence with automatic halt on boundary violation",
                 MeasureStatus.TESTED, ["T-PLN-S4-01"])]))
    hz3 = repo.add(Hazard(
        RecordId(RecordKind.HZ, 3),
        "Passenger injured by lift platform movement during boarding",
        MitigationStatus.MEASURES_TESTED,
        [Measure(MeasureKind.TECHNICAL,
                 "Lift interlock preventing movement while occupied",
                 MeasureStatus.TESTED, ["T-LFT-S4-01"]),
         Measure(MeasureKind.ORGANIZATIONAL,
                 "Boarding supervised by trained staff",
                 MeasureStatus.TESTED, ["T-LFT-S4-02"])]))
    hz4 = repo.add(Hazard(
        RecordId(RecordKind.HZ, 4),
        "Unexpected standstill of the vehicle on the track"))

    couplings = [
        (os1.id, mf1.id, hz1.id, RiskParameters(3, 4, 3)),  # ASIL D
        (os1.id, mf2.id, hz1.id, RiskParameters(3, 3, 3)),  # ASIL C
        (os1.id, mf3.id, hz1.id, RiskParameters(3, 3, 2)),  # ASIL B
        (os2.id, mf2.id, hz2.id, RiskParameters(1, 4, 2)),  # ASIL A
        (os2.id, mf3.id, hz2.id, RiskParameters(2, 2, 2)),  # QM
        (os3.id, mf4.id, hz3.id, RiskParameters(2, 3, 3)),  # ASIL B
        (os3.id, mf5.id, hz3.id, RiskParameters(2, 2, 3)),  # ASIL A
        (os1.id, mf6.id, hz4.id, RiskParameters(1, 4, 1)),  # QM
    ]
    for serial, (scenario, malfunction, hazard, params) in enumerate(couplings, start=1):
        draft = HazardousScenario(RecordId(RecordKind.HS, serial),
                                  scenario, malfunction, hazard)
        repo.add(classify(draft, params))

    repo.add(SafetyGoal(RecordId(RecordKind.SG, 1), hz1.id,
                        "The prototype shall not collide with persons in the"
                        " driving corridor", rsil=4))
    repo.add(SafetyGoal(RecordId(RecordKind.SG, 2), hz2.id,
                        "The prototype shall remain within the cleared"
                        " demonstration corridor", rsil=1))
    repo.add(SafetyGoal(RecordId(RecordKind.SG, 3), hz3.id,
                        "Boarding shall not expose passengers to lift"
                        " platform movement", rsil=2))
    repo.add(SafetyGoal(RecordId(RecordKind.SG, 4), hz4.id,
                        "An unexpected halt shall lead to a safe standstill"
                        " state", rsil=0))

    fsr = {}
    for serial, (goal, statement, rsil) in enumerate([
        (1, "Detect objects in the driving corridor and initiate braking"
            " before contact", 4),
        (2, "Monitor the vehicle position against the cleared corridor and"
            " halt on violation", 1),
        (3, "Inhibit lift movement while the platform is occupied or not"
            " fully stowed", 2),
        (4, "Signal a halt condition and hold the vehicle stationary until"
            " released", 0),
    ], start=1):
        fsr[serial] = repo.add(SafetyRequirement(
            id=RecordId(RecordKind.FSR, serial),
            kind=RequirementKind.FUNCTIONAL,
            parent=RecordId(RecordKind.SG, goal),
            statement=statement,
            inherited_rsil=rsil))

    tsr = {}
    for serial, (parent, component, statement, rsil) in enumerate([
        (1, CMP_PERCEPTION, "Report obstacles within the corridor to the"
            " planner within 100 ms", 4),
        (1, CMP_MOTION, "Execute emergency braking commands within 200 ms", 4),
        (2, CMP_PLANNING, "Keep planned trajectories within the corridor"
            " bounds at all times", 1),
        (3, CMP_LIFT, "Inhibit platform actuation unless the interlock"
            " reports stowed-and-clear", 2),
        (4, CMP_PLATFORM, "Latch the safe-halt state on loss of the"
            " supervision heartbeat", 0),
    ], start=1):
        tsr[serial] = repo.add(SafetyRequirement(
            id=RecordId(RecordKind.TSR, serial),
            kind=RequirementKind.TECHNICAL,
            parent=RecordId(RecordKind.FSR, parent),
            statement=statement,
            allocated_to=[component],
            inherited_rsil=rsil))

    # Component release documents: the platform accompanies every stage, the
    # automation components join at stage 3, the lift at the rehearsal stage.
    plans = [
        (CMP_PLATFORM, "vehicle platform", tsr[5].id, [hz4.id], (1, 2, 3, 4, 5)),
        (CMP_PERCEPTION, "environment perception", tsr[1].id, [hz1.id], (3, 4, 5)),
        (CMP_PLANNING, "behavior planning", tsr[3].id, [hz1.id, hz2.id], (3, 4, 5)),
        (CMP_MOTION, "motion control", tsr[2].id, [hz1.id, hz2.id], (3, 4, 5)),
        (CMP_LIFT, "boarding assistance (lift)", tsr[4].id, [hz3.id], (4, 5)),
    ]
    serial = 1
    for component, name, requirement, hazards, stages in plans:
        for stage in stages:
            repo.add(_crd(serial, component, stage, name, requirement, hazards))
            serial += 1

    _system_docs(repo)
    _compositions(repo)
    return repo


def crd_for(repo: Repository, component: RecordId, stage: int) -> ComponentReleaseDocument:
    for crd in repo.releases_for(component, stage):
        return crd
    raise LookupError(f"no release document for {component} at stage {stage}")


def run_walkthrough(engine: ProcessEngine, through_stage: int = 5,
                    decide_final: bool = True) -> None:
    """Advance autoELF stage by stage through the release process."""
    repo = engine.repo
    engine.record_event(SAFETY_LEAD, EventKind.INITIAL_ANALYSES_COMPLETED, {
        "note": "initial hazard identification recorded in the hazard log",
        "hazards": len(repo.hazards),
    })
    engine.record_event(SAFETY_LEAD, EventKind.PRELIMINARY_SAFETY_CONCEPT_ISSUED, {
        "note": "preliminary safety concept issued to function development",
    })

    for stage in range(1, through_stage + 1):
        composition = repo.composition_for(PRO_ELF, stage)
        for component_id in sorted(composition.required_component_modules):
            component = repo.find(component_id)
            crd = crd_for(repo, component_id, stage)
            if crd.release_status is ReleaseStatus.RELEASED:
                continue  # shared module already released for this stage
            engine.submit_crd(component.developer, crd.id)
            engine.examine_crd(SAFETY_LEAD, crd.id)
            if stage == 3 and component_id == CMP_PERCEPTION:
                # one pass through the mismatch loop
                engine.flag_mismatch(SAFETY_LEAD, crd.id,
                                     "fallback behavior on sensor dropout not verified")
                engine.submit_crd(component.developer, crd.id)
                engine.examine_crd(SAFETY_LEAD, crd.id)
            engine.release_component(component.developer, crd.id)

        if stage == 3:
            engine.record_event(AUDITOR, EventKind.TEST_ACCOMPANIED, {
                "prototype": str(PRO_ELF),
                "note": "closed-course braking tests accompanied",
            })
            engine.record_event(SAFETY_LEAD, EventKind.SAFETY_DOCUMENTATION_UPDATED, {
                "note": "technical safety concept refined after corridor tests",
            })
        if stage == 5:
            engine.record_event(AUDITOR, EventKind.TEST_ACCOMPANIED, {
                "prototype": str(PRO_ELF),
                "note": "demonstration rehearsal accompanied",
            })

        engine.add_review(AUDITOR, PRO_ELF, stage, Recommendation.FOR,
                          f"Safety assurance activities reviewed for stage {stage};"
                          " recommendation for release.")
        engine.compile(SAFETY_LEAD, PRO_ELF, stage)
        if stage < through_stage or decide_final:
            stage_def = repo.stage_definition(stage)
            engine.decide(COMMITTEE, PRO_ELF, stage, DecisionVerdict.GRANTED,
                          conditions=stage_def.operating_conditions)
        if stage == 1 and (decide_final or through_stage > 1):
            engine.record_event("dev-platform", EventKind.OPERATION_RECORDED, {
                "prototype": str(PRO_ELF),
                "stage_context": 1,
                "note": "manual low-speed ride on the test site",
            })


def build_demo(root: str | Path | None = None, through_stage: int = 5,
               decide_final: bool = True) -> ProcessEngine:
    """Records plus walkthrough; saves to ``root`` when given."""
    repo = build_records(Path(root) if root is not None else None)
    engine = ProcessEngine(repo, clock=_ticking_clock())
    run_walkthrough(engine, through_stage=through_stage, decide_final=decide_final)
    if root is not None:
        engine.save()
    return engine
