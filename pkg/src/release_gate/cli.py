"""Command-line front door for all process actors.

Exit codes: 0 success / no issues, 1 validation issues found, 2 parse or
I/O error, 3 role-or-gate violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

from . import store
from .compiler import CompileRefusedError, output_name
from .engine import ProcessEngine, RecordInvalidError
from .events import EventKind
from .fixtures import build_demo
from .model import (
    Actor,
    Component,
    DecisionVerdict,
    DocStatus,
    Hazard,
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
    validate_record,
)
from .risk import classify, derive_hazardous_scenarios, hazard_rsil
from .validation import ConfigurationError, check_mitigation, check_traceability
from .workflow import WorkflowError

ACTOR_ENV_VAR = "RELEASE_GATE_ACTOR"

EXIT_OK = 0
EXIT_ISSUES = 1
EXIT_IO = 2
EXIT_GATE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="release-gate",
        description="Staged release process for prototype demonstrations:"
                    " records, risk classification, gates, and release documents.")
    parser.add_argument("-C", "--repo", default=".", help="repository root (default: .)")
    parser.add_argument("--actor", default=None,
                        help=f"acting actor id (default: ${ACTOR_ENV_VAR})")
    parser.add_argument("--format", choices=("text", "json"), default="text",
                        help="output format for machine-readable commands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a repository skeleton")
    p.add_argument("--demo", action="store_true",
                   help="seed the four-prototype demo project")
    p.add_argument("--pending-final", action="store_true",
                   help="with --demo: leave the final stage-5 decision open")

    p = sub.add_parser("add", help="add a record")
    kinds = p.add_subparsers(dest="kind", required=True)

    q = kinds.add_parser("prototype")
    q.add_argument("--name", required=True)
    q.add_argument("--use-case", default="")

    q = kinds.add_parser("actor")
    q.add_argument("--id", required=True)
    q.add_argument("--role", required=True, choices=[r.value for r in Role])
    q.add_argument("--name", default="")

    q = kinds.add_parser("scenario")
    q.add_argument("--kind", required=True, dest="scenario_kind",
                   choices=[k.value for k in ScenarioKind])
    q.add_argument("--description", required=True)

    q = kinds.add_parser("malfunction")
    q.add_argument("--component", required=True)
    q.add_argument("--description", required=True)

    q = kinds.add_parser("hazard")
    q.add_argument("--description", required=True)

    q = kinds.add_parser("component")
    q.add_argument("--name", required=True)
    q.add_argument("--developer", required=True)
    q.add_argument("--prototype", action="append", default=[])
    q.add_argument("--role", action="append", default=[], dest="roles")

    q = kinds.add_parser("system-doc")
    q.add_argument("--prototype", required=True)
    q.add_argument("--kind", required=True, dest="doc_kind",
                   choices=[k.value for k in SystemDocKind])
    q.add_argument("--content", default="")
    q.add_argument("--status", default=DocStatus.DRAFT.value,
                   choices=[s.value for s in DocStatus])

    q = kinds.add_parser("safety-goal")
    q.add_argument("--hazard", required=True)
    q.add_argument("--statement", required=True)

    q = kinds.add_parser("requirement")
    q.add_argument("--kind", required=True, dest="req_kind",
                   choices=[k.value for k in RequirementKind])
    q.add_argument("--parent", required=True)
    q.add_argument("--statement", required=True)
    q.add_argument("--allocate", action="append", default=[])

    q = kinds.add_parser("crd", help="component release document from the template")
    q.add_argument("--component", required=True)
    q.add_argument("--stage", type=int, required=True)

    q = kinds.add_parser("test", help="test record inside a release document")
    q.add_argument("--crd", required=True)
    q.add_argument("--id", required=True)
    q.add_argument("--requirement", action="append", required=True)
    q.add_argument("--environment", required=True,
                   choices=[e.value for e in TestEnvironment])
    q.add_argument("--verdict", required=True, choices=[v.value for v in Verdict])
    q.add_argument("--stage-context", type=int, required=True)

    q = kinds.add_parser("measure", help="mitigation measure on a hazard")
    q.add_argument("--hazard", required=True)
    q.add_argument("--kind", required=True, dest="measure_kind",
                   choices=[k.value for k in MeasureKind])
    q.add_argument("--description", required=True)
    q.add_argument("--status", default=MeasureStatus.DEFINED.value,
                   choices=[s.value for s in MeasureStatus])
    q.add_argument("--verified-by", action="append", default=[])

    q = kinds.add_parser("composition")
    q.add_argument("--prototype", required=True)
    q.add_argument("--stage", type=int, required=True)
    q.add_argument("--doc", action="append", default=[],
                   choices=[k.value for k in SystemDocKind])
    q.add_argument("--component", action="append", default=[])

    p = sub.add_parser("derive-hazards",
                       help="couple every scenario with every malfunction")

    p = sub.add_parser("assess", help="classify a hazardous scenario")
    p.add_argument("hs")
    p.add_argument("--severity", "--s", dest="severity", type=int, required=True)
    p.add_argument("--exposure", "--e", dest="exposure", type=int, required=True)
    p.add_argument("--controllability", "--c", dest="controllability",
                   type=int, required=True)

    p = sub.add_parser("link", help="add a trace edge")
    p.add_argument("--hs", help="hazardous scenario to link to a hazard")
    p.add_argument("--hazard")
    p.add_argument("--crd", help="release document covering a requirement")
    p.add_argument("--tsr")

    p = sub.add_parser("submit-crd", help="submit a release document for examination")
    p.add_argument("crd")

    p = sub.add_parser("flag-mismatch",
                       help="flag deficient requirement fulfillment")
    p.add_argument("crd")
    p.add_argument("--notes", default="")

    p = sub.add_parser("release-component", help="issue a component release")
    p.add_argument("crd")

    p = sub.add_parser("review", help="record a certification review")
    p.add_argument("--prototype", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--recommendation", required=True,
                   choices=[r.value for r in Recommendation])
    p.add_argument("--notes", default="")

    p = sub.add_parser("decide", help="record a release committee decision")
    p.add_argument("--prototype", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--verdict", default=DecisionVerdict.GRANTED.value,
                   choices=[v.value for v in DecisionVerdict])
    p.add_argument("--conditions", default="")

    p = sub.add_parser("record-event", help="record an audit-trail event")
    p.add_argument("kind", choices=[k.value for k in (
        EventKind.INITIAL_ANALYSES_COMPLETED,
        EventKind.PRELIMINARY_SAFETY_CONCEPT_ISSUED,
        EventKind.DOCUMENTATION_EXAMINED,
        EventKind.SAFETY_DOCUMENTATION_UPDATED,
        EventKind.TEST_ACCOMPANIED,
        EventKind.OPERATION_RECORDED,
    )])
    p.add_argument("--prototype")
    p.add_argument("--crd")
    p.add_argument("--stage-context", type=int)
    p.add_argument("--note", default="")

    p = sub.add_parser("status", help="prototype x stage readiness grid")

    p = sub.add_parser("validate", help="run validation checks")
    p.add_argument("--prototype")
    p.add_argument("--stage", type=int)

    p = sub.add_parser("compile", help="compile a release document")
    p.add_argument("--prototype", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--out", default=None, help="output directory (default: repo root)")

    p = sub.add_parser("set-mitigation", help="update a hazard's mitigation status")
    p.add_argument("hazard")
    p.add_argument("--status", required=True,
                   choices=[s.value for s in MitigationStatus])

    p = sub.add_parser("mark-stale",
                       help="flag a modified component's released documents")
    p.add_argument("component")

    p = sub.add_parser("conditions",
                       help="permissible operating conditions of a prototype")
    p.add_argument("prototype")

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--tokens", required=True,
                   help="JSON file mapping session tokens to actor ids")
    p.add_argument("--static", default=None,
                   help="directory with the dashboard build to serve at /")

    return parser


def _record_id(text: str) -> RecordId:
    try:
        return RecordId.parse(text)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def _actor(args: argparse.Namespace) -> str:
    actor = args.actor or os.environ.get(ACTOR_ENV_VAR)
    if not actor:
        raise CliError(
            f"an acting actor is required: pass --actor or set ${ACTOR_ENV_VAR}",
            EXIT_GATE)
    return actor


def _emit(args: argparse.Namespace, data: Any, text: str) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _add_record(engine: ProcessEngine, args: argparse.Namespace) -> int:
    repo = engine.repo
    record: Any
    if args.kind == "prototype":
        record = Prototype(RecordId(RecordKind.PRO, repo.next_serial(RecordKind.PRO)),
                           args.name, args.use_case)
    elif args.kind == "actor":
        if args.id in repo.actors:
            raise CliError(f"duplicate actor id: {args.id}", EXIT_IO)
        repo.actors[args.id] = Actor(args.id, Role(args.role), args.name)
        engine.save()
        print(args.id)
        return EXIT_OK
    elif args.kind == "scenario":
        record = OperationalScenario(
            RecordId(RecordKind.OS, repo.next_serial(RecordKind.OS)),
            ScenarioKind(args.scenario_kind), args.description)
    elif args.kind == "malfunction":
        record = Malfunction(RecordId(RecordKind.MF, repo.next_serial(RecordKind.MF)),
                             _record_id(args.component), args.description)
    elif args.kind == "hazard":
        record = Hazard(RecordId(RecordKind.HZ, repo.next_serial(RecordKind.HZ)),
                        args.description)
    elif args.kind == "component":
        record = Component(RecordId(RecordKind.CMP, repo.next_serial(RecordKind.CMP)),
                           args.name, args.developer,
                           {_record_id(p) for p in args.prototype}, list(args.roles))
    elif args.kind == "system-doc":
        record = SystemWideDocument(
            RecordId(RecordKind.SWD, repo.next_serial(RecordKind.SWD)),
            _record_id(args.prototype), SystemDocKind(args.doc_kind),
            args.content, DocStatus(args.status))
    elif args.kind == "safety-goal":
        hazard = _record_id(args.hazard)
        record = SafetyGoal(RecordId(RecordKind.SG, repo.next_serial(RecordKind.SG)),
                            hazard, args.statement, rsil=hazard_rsil(repo, hazard))
    elif args.kind == "requirement":
        kind = RequirementKind(args.req_kind)
        parent = _record_id(args.parent)
        parent_record = repo.find(parent)
        inherited = 0
        if parent_record is not None:
            inherited = (parent_record.rsil if kind is RequirementKind.FUNCTIONAL
                         else parent_record.inherited_rsil)
        prefix = RecordKind.FSR if kind is RequirementKind.FUNCTIONAL else RecordKind.TSR
        record = SafetyRequirement(
            RecordId(prefix, repo.next_serial(prefix)), kind, parent,
            args.statement, [_record_id(c) for c in args.allocate], inherited)
    elif args.kind == "crd":
        from .compiler import component_template
        record = component_template(repo, _record_id(args.component), args.stage)
        repo.add(record)
        engine.save()
        print(record.id)
        return EXIT_OK
    elif args.kind == "test":
        crd = repo.find(_record_id(args.crd))
        if crd is None:
            raise CliError(f"unknown release document {args.crd}", EXIT_IO)
        test = TestRecord(args.id, [_record_id(r) for r in args.requirement],
                          TestEnvironment(args.environment), Verdict(args.verdict),
                          args.stage_context)
        violations = validate_record(test, repo)
        if violations:
            raise RecordInvalidError(violations)
        crd.test_records.append(test)
        engine.save()
        print(f"{crd.id}: recorded test {test.id}")
        return EXIT_OK
    elif args.kind == "measure":
        hazard = repo.find(_record_id(args.hazard))
        if hazard is None:
            raise CliError(f"unknown hazard {args.hazard}", EXIT_IO)
        measure = Measure(MeasureKind(args.measure_kind), args.description,
                          MeasureStatus(args.status), list(args.verified_by))
        violations = validate_record(measure, repo)
        if violations:
            raise RecordInvalidError(violations)
        hazard.measures.append(measure)
        engine.save()
        print(f"{hazard.id}: measure [{len(hazard.measures) - 1}] recorded")
        return EXIT_OK
    elif args.kind == "composition":
        composition = StageComposition(
            _record_id(args.prototype), args.stage,
            {SystemDocKind(d) for d in args.doc},
            {_record_id(c) for c in args.component})
        violations = validate_record(composition, repo)
        if violations:
            raise RecordInvalidError(violations)
        if repo.composition_for(composition.prototype, composition.stage) is not None:
            raise CliError(
                f"composition for {composition.prototype} stage {composition.stage}"
                " already exists", EXIT_IO)
        repo.compositions.append(composition)
        engine.save()
        print(f"composition {composition.prototype} stage {composition.stage}")
        return EXIT_OK
    else:  # pragma: no cover - argparse restricts the choices
        raise CliError(f"unknown record kind {args.kind}", EXIT_IO)

    violations = validate_record(record, repo)
    if violations:
        raise RecordInvalidError(violations)
    repo.add(record)
    engine.save()
    print(record.id)
    return EXIT_OK


def _cmd_validate(engine: ProcessEngine, args: argparse.Namespace) -> int:
    repo = engine.repo
    if args.prototype or args.stage:
        if not (args.prototype and args.stage):
            raise CliError("validate needs both --prototype and --stage, or neither",
                           EXIT_IO)
        report = engine.readiness(_record_id(args.prototype), args.stage)
        _emit(args, report.to_json_dict(), report.to_text())
        return EXIT_ISSUES if report.issues else EXIT_OK

    lines = []
    payload: dict[str, Any] = {"violations": [], "issues": []}
    for record in repo.iter_records():
        for violation in validate_record(record, repo):
            lines.append(str(violation))
            payload["violations"].append({"record": violation.record,
                                          "field": violation.field,
                                          "message": violation.message})
    for composition in repo.compositions:
        for violation in validate_record(composition, repo):
            lines.append(str(violation))
            payload["violations"].append({"record": violation.record,
                                          "field": violation.field,
                                          "message": violation.message})
    for issue in check_traceability(repo) + check_mitigation(repo):
        lines.append(str(issue))
        payload["issues"].append(issue.to_json_dict())
    if lines:
        _emit(args, payload, "\n".join(lines) + "\n")
        return EXIT_ISSUES
    _emit(args, payload, "repository is valid, no issues\n")
    return EXIT_OK


def _cmd_status(engine: ProcessEngine, args: argparse.Namespace) -> int:
    overview = engine.overview()
    if args.format == "json":
        print(json.dumps(overview, indent=2, ensure_ascii=False))
        return EXIT_OK

    width = max([len(row["name"]) for row in overview["prototypes"]] + [9])
    header = "prototype".ljust(width) + "".join(f"  stage {s}   " for s in range(1, 6))
    lines = [header, "-" * len(header)]
    for row in overview["prototypes"]:
        cells = []
        for cell in row["stages"]:
            if cell["status"] == "Granted":
                cells.append("granted   ")
            elif cell["status"] == "Ready":
                cells.append("ready     ")
            else:
                cells.append(f"blocked({cell['blocking']})".ljust(10))
        lines.append(row["name"].ljust(width) + "  " + "  ".join(cells))
    log = overview["hazard_log"]
    lines.append("")
    lines.append(f"hazard log: {log['total']} hazards; by RSIL "
                 + ", ".join(f"{k}:{v}" for k, v in log["rsil_counts"].items())
                 + f"; unresolved: {', '.join(log['unresolved']) or 'none'}")
    lines.append("pending mismatches: "
                 + (", ".join(overview["pending_mismatches"]) or "none"))
    lines.append(f"journal: {overview['journal_length']} events")
    print("\n".join(lines))
    return EXIT_OK


def _cmd_conditions(engine: ProcessEngine, args: argparse.Namespace) -> int:
    from .workflow import permissible_conditions

    prototype = _record_id(args.prototype)
    stage = permissible_conditions(engine.state, prototype, engine.repo)
    if stage is None:
        _emit(args, {"granted": False},
              f"{prototype}: no stage granted, operation is not permitted\n")
        return EXIT_OK
    data = {"granted": True, "stage": stage.number,
            "operating_mode": stage.operating_mode.value,
            "description": stage.description,
            "operating_conditions": stage.operating_conditions}
    _emit(args, data,
          f"{prototype}: stage {stage.number} ({stage.operating_mode.value})\n"
          f"  {stage.description}\n  conditions: {stage.operating_conditions}\n")
    return EXIT_OK


def _run(args: argparse.Namespace) -> int:
    root = Path(args.repo)

    if args.command == "init":
        if args.demo:
            if (root / store.CONFIG_FILE).exists():
                raise CliError(f"{root} already contains a repository", EXIT_IO)
            engine = build_demo(root, decide_final=not args.pending_final)
            print(f"demo repository with {len(engine.repo.journal)} journal events"
                  f" created at {root}")
        else:
            store.init(root)
            print(f"empty repository created at {root}")
        return EXIT_OK

    if args.command == "serve":
        from .service import create_app, load_tokens
        import uvicorn

        app = create_app(root, load_tokens(args.tokens), static_dir=args.static)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return EXIT_OK

    engine = ProcessEngine.open(root)

    if args.command == "add":
        return _add_record(engine, args)

    if args.command == "derive-hazards":
        existing = {(hs.scenario, hs.malfunction)
                    for hs in engine.repo.hazardous_scenarios.values()}
        drafts = derive_hazardous_scenarios(
            list(engine.repo.scenarios.values()),
            list(engine.repo.malfunctions.values()),
            relevance=lambda s, m: (s.id, m.id) not in existing,
            start_serial=engine.repo.next_serial(RecordKind.HS))
        for draft in drafts:
            engine.repo.add(draft)
        engine.save()
        print(f"derived {len(drafts)} hazardous scenario draft(s)")
        return EXIT_OK

    if args.command == "assess":
        from .model import RiskParameters

        hs_id = _record_id(args.hs)
        hs = engine.repo.find(hs_id)
        if hs is None:
            raise CliError(f"unknown hazardous scenario {hs_id}", EXIT_IO)
        params = RiskParameters(args.severity, args.exposure, args.controllability)
        assessed = classify(hs, params)
        engine.repo.hazardous_scenarios[hs_id] = assessed
        engine.save()
        print(f"{hs_id}: ASIL {assessed.assessment.asil.name},"
              f" RSIL {assessed.assessment.rsil}")
        return EXIT_OK

    if args.command == "link":
        repo = engine.repo
        if args.hs and args.hazard:
            hs = repo.find(_record_id(args.hs))
            if hs is None:
                raise CliError(f"unknown hazardous scenario {args.hs}", EXIT_IO)
            hazard = _record_id(args.hazard)
            if repo.find(hazard) is None:
                raise CliError(f"unknown hazard {args.hazard}", EXIT_IO)
            hs.hazard = hazard
            engine.save()
            print(f"{hs.id} -> {hazard}")
            return EXIT_OK
        if args.crd and args.tsr:
            crd = repo.find(_record_id(args.crd))
            if crd is None:
                raise CliError(f"unknown release document {args.crd}", EXIT_IO)
            tsr = _record_id(args.tsr)
            if repo.find(tsr) is None:
                raise CliError(f"unknown requirement {args.tsr}", EXIT_IO)
            if tsr not in crd.covered_requirements:
                crd.covered_requirements.append(tsr)
            engine.save()
            print(f"{crd.id} covers {tsr}")
            return EXIT_OK
        raise CliError("link needs --hs with --hazard, or --crd with --tsr", EXIT_IO)

    if args.command == "set-mitigation":
        hazard = engine.repo.find(_record_id(args.hazard))
        if hazard is None:
            raise CliError(f"unknown hazard {args.hazard}", EXIT_IO)
        hazard.mitigation_status = MitigationStatus(args.status)
        violations = validate_record(hazard, engine.repo)
        if violations:
            raise RecordInvalidError(violations)
        engine.save()
        print(f"{hazard.id}: mitigation status {hazard.mitigation_status.value}")
        return EXIT_OK

    if args.command == "mark-stale":
        engine.mark_component_stale(_record_id(args.component))
        engine.save()
        print(f"released documents of {args.component} marked stale")
        return EXIT_OK

    if args.command == "status":
        return _cmd_status(engine, args)

    if args.command == "validate":
        return _cmd_validate(engine, args)

    if args.command == "conditions":
        return _cmd_conditions(engine, args)

    # Everything below is a gated action: exactly one journal event on success.
    actor = _actor(args)

    if args.command == "submit-crd":
        event = engine.submit_crd(actor, _record_id(args.crd))
        engine.save()
        print(f"seq {event.seq}: {args.crd} submitted")
        return EXIT_OK

    if args.command == "flag-mismatch":
        event = engine.flag_mismatch(actor, _record_id(args.crd), args.notes)
        engine.save()
        print(f"seq {event.seq}: {args.crd} mismatch-flagged")
        return EXIT_OK

    if args.command == "release-component":
        event = engine.release_component(actor, _record_id(args.crd))
        engine.save()
        print(f"seq {event.seq}: {args.crd} released")
        return EXIT_OK

    if args.command == "review":
        review = engine.add_review(actor, _record_id(args.prototype), args.stage,
                                   Recommendation(args.recommendation), args.notes)
        engine.save()
        print(f"{review.id}: recommendation {review.recommendation.value}"
              f" for {review.prototype} stage {review.stage}")
        return EXIT_OK

    if args.command == "decide":
        decision = engine.decide(actor, _record_id(args.prototype), args.stage,
                                 DecisionVerdict(args.verdict), args.conditions)
        engine.save()
        granted = sorted(engine.state.granted_stages(decision.prototype))
        print(f"{decision.id}: {decision.verdict.value} for {decision.prototype}"
              f" stage {decision.stage}; granted stages now {granted}")
        return EXIT_OK

    if args.command == "record-event":
        payload: dict[str, Any] = {}
        if args.prototype:
            payload["prototype"] = str(_record_id(args.prototype))
        if args.crd:
            payload["crd"] = str(_record_id(args.crd))
        if args.stage_context is not None:
            payload["stage_context"] = args.stage_context
        if args.note:
            payload["note"] = args.note
        event = engine.record_event(actor, EventKind(args.kind), payload)
        engine.save()
        print(f"seq {event.seq}: {event.kind.value} recorded")
        return EXIT_OK

    if args.command == "compile":
        prototype = _record_id(args.prototype)
        out_dir = Path(args.out) if args.out else root
        document = engine.compile(actor, prototype, args.stage, out_dir=out_dir)
        engine.save()
        print(f"compiled release document {output_name(prototype, args.stage, 'Text')}"
              f" and .json in {out_dir}")
        print(f"content digest: {document.content_digest}")
        return EXIT_OK

    raise CliError(f"unknown command {args.command}", EXIT_IO)  # pragma: no cover


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except RecordInvalidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ISSUES
    except CompileRefusedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(exc.report.to_text(), file=sys.stderr, end="")
        return EXIT_ISSUES
    except WorkflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (store.StoreError, ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
