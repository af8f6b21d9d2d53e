import copy
import json

import pytest

from release_gate import store
from release_gate.compiler import (
    CompileRefusedError,
    ReleaseDocument,
    compile as compile_document,
    component_template,
    output_name,
    render,
)
from release_gate.fixtures import (
    CMP_LIFT,
    CMP_PERCEPTION,
    PRO_ELF,
    build_demo,
    crd_for,
)
from release_gate.model import RecordId, RecordKind, RequirementKind
from release_gate.validation import IssueCategory, check_component_release
from release_gate.workflow import replay


@pytest.fixture
def compiled(demo_engine):
    document = compile_document(demo_engine.repo, demo_engine.state, PRO_ELF, 5)
    return demo_engine, document


def test_stage5_document_includes_the_lift_module(compiled):
    engine, document = compiled
    lift_crd = crd_for(engine.repo, CMP_LIFT, 5)
    ids = [entry["id"] for entry in document.components_section]
    assert str(lift_crd.id) in ids
    names = [entry["component_name"] for entry in document.components_section]
    assert "boarding assistance (lift)" in names


def test_system_section_follows_the_fixed_order(compiled):
    _, document = compiled
    kinds = [entry["kind"] for entry in document.system_wide_section]
    assert kinds == [
        "SafetyPlan", "ItemDefinition", "HazardAnalysisRiskAssessment",
        "FunctionalSafetyConcept", "TechnicalSafetyConcept", "SafetyCase",
        "OperatingInstructions",
    ]


def test_compile_twice_yields_identical_digest(compiled):
    engine, document = compiled
    again = compile_document(engine.repo, engine.state, PRO_ELF, 5)
    assert again.content_digest == document.content_digest
    assert render(again, "JSON") == render(document, "JSON")
    assert render(again, "Text") == render(document, "Text")


def test_digest_survives_reload_and_record_order(tmp_path):
    root = tmp_path / "repo"
    engine = build_demo(root)
    document = compile_document(engine.repo, engine.state, PRO_ELF, 5)

    reloaded = store.load(root)
    state = replay(reloaded.journal, reloaded)
    recompiled = compile_document(reloaded, state, PRO_ELF, 5)
    assert recompiled.content_digest == document.content_digest
    assert render(recompiled, "Text") == render(document, "Text")


def test_digest_changes_when_content_changes(compiled):
    engine, document = compiled
    repo = copy.deepcopy(engine.repo)
    crd_for(repo, CMP_LIFT, 5).known_limitations += " Additional remark."
    changed = compile_document(repo, engine.state, PRO_ELF, 5)
    assert changed.content_digest != document.content_digest


def test_safety_case_claim_tree_roots_at_risk_claim(compiled):
    _, document = compiled
    tree = next(entry["claim_tree"] for entry in document.system_wide_section
                if entry["kind"] == "SafetyCase")
    assert tree["claim"].startswith("Absence of unreasonable risk")
    goals = [child["goal"] for child in tree["children"]]
    assert goals == sorted(goals) and len(goals) == 4
    assert all(child["evidence"] for child in tree["children"]
               if child["technical_requirements"])


def test_hazard_log_embedded_in_hara_section(compiled):
    _, document = compiled
    log = next(entry["hazard_log"] for entry in document.system_wide_section
               if entry["kind"] == "HazardAnalysisRiskAssessment")
    assert log["total"] == 4
    assert log["unresolved"] == []
    wordings = {row["rsil"]: row["risk_wording"] for row in log["rows"]}
    assert wordings[4] == "very high"


def test_text_render_has_one_trace_row_per_technical_requirement(compiled):
    engine, document = compiled
    text = render(document, "Text").decode("utf-8")
    tsrs = [r for r in engine.repo.requirements.values()
            if r.kind is RequirementKind.TECHNICAL]
    for tsr in tsrs:
        assert f"{tsr.id} (RSIL {tsr.inherited_rsil}) ->" in text
    assert "DISCLOSED ISSUES" in text
    assert "No outstanding issues." in text


def test_json_render_round_trips_to_equal_document(compiled):
    _, document = compiled
    parsed = ReleaseDocument.from_json_dict(json.loads(render(document, "JSON")))
    assert parsed == document


def test_unknown_render_format_is_a_usage_error(compiled):
    _, document = compiled
    with pytest.raises(ValueError, match="unknown render format"):
        render(document, "PDF")


def test_compile_refused_while_modules_are_missing(demo_engine):
    repo = copy.deepcopy(demo_engine.repo)
    repo.remove(crd_for(repo, CMP_LIFT, 5).id)
    with pytest.raises(CompileRefusedError) as err:
        compile_document(repo, demo_engine.state, PRO_ELF, 5)
    categories = {i.category for i in err.value.report.issues}
    assert categories == {IssueCategory.MISSING_MODULE}


def test_non_missing_issues_are_disclosed_not_blocking(demo_engine):
    repo = copy.deepcopy(demo_engine.repo)
    crd_for(repo, CMP_PERCEPTION, 5).known_limitations = ""
    document = compile_document(repo, demo_engine.state, PRO_ELF, 5)
    assert len(document.disclosed_issues) == 1
    assert document.disclosed_issues[0]["category"] == "IncompleteTemplate"
    text = render(document, "Text").decode("utf-8")
    assert "[IncompleteTemplate]" in text


def test_output_names():
    assert output_name(PRO_ELF, 5, "Text") == "release-PRO-0003-stage5.txt"
    assert output_name(PRO_ELF, 5, "JSON") == "release-PRO-0003-stage5.json"


def test_component_template_prefills_hazards(records_only_repo):
    skeleton = component_template(records_only_repo, CMP_LIFT, 5)
    assert skeleton.component == CMP_LIFT
    assert skeleton.stage == 5
    # both lift malfunctions couple into the same boarding hazard
    assert skeleton.hazards_caused == [RecordId(RecordKind.HZ, 3)]
    assert skeleton.release_status.value == "Draft"


def test_component_template_without_malfunctions(records_only_repo):
    quiet = RecordId(RecordKind.CMP, records_only_repo.next_serial(RecordKind.CMP))
    from release_gate.model import Component

    records_only_repo.add(Component(quiet, "telemetry logger", "dev-platform"))
    skeleton = component_template(records_only_repo, quiet, 3)
    assert skeleton.hazards_caused == []


def test_fresh_template_fails_exactly_the_empty_field_checks(records_only_repo):
    skeleton = component_template(records_only_repo, CMP_LIFT, 5)
    issues = check_component_release(skeleton)
    assert [i.category for i in issues] == [IssueCategory.INCOMPLETE_TEMPLATE] * 5
    fields = {i.message.split("'")[1] for i in issues}
    assert fields == {"functions_and_interfaces", "subsystem_boundaries",
                      "fallback_mechanisms", "known_limitations",
                      "mitigation_strategies"}


def test_metrics_count_sections_and_words(compiled):
    _, document = compiled
    assert document.metrics["system_documents"] == 7
    assert document.metrics["component_releases"] == 5
    assert document.metrics["hazards"] == 4
    assert document.metrics["word_count"] > 0
    assert document.metrics["test_records"] == sum(
        len(entry["test_records"]) for entry in document.components_section)
