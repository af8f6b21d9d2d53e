import pytest

from release_gate.model import (
    AsilLevel,
    Hazard,
    HazardousScenario,
    Malfunction,
    MitigationStatus,
    OperationalScenario,
    RecordId,
    RecordKind,
    RiskParameters,
    ScenarioKind,
)
from release_gate.risk import (
    HazardLogSummary,
    IntegrityError,
    asil_from_sec,
    classify,
    derive_hazardous_scenarios,
    hazard_log_summary,
    rsil_from_asil,
)
from release_gate.store import Repository

# Independent oracle: literal transcription of the 36-cell integrity-level
# determination table (severity x exposure rows, controllability columns).
DETERMINATION_TABLE = {
    (1, 1): ("QM", "QM", "QM"),
    (1, 2): ("QM", "QM", "QM"),
    (1, 3): ("QM", "QM", "A"),
    (1, 4): ("QM", "A", "B"),
    (2, 1): ("QM", "QM", "QM"),
    (2, 2): ("QM", "QM", "A"),
    (2, 3): ("QM", "A", "B"),
    (2, 4): ("A", "B", "C"),
    (3, 1): ("QM", "QM", "A"),
    (3, 2): ("QM", "A", "B"),
    (3, 3): ("A", "B", "C"),
    (3, 4): ("B", "C", "D"),
}


def table_oracle(severity: int, exposure: int, controllability: int) -> AsilLevel:
    return AsilLevel[DETERMINATION_TABLE[(severity, exposure)][controllability - 1]]


def test_closed_form_matches_table_on_all_36_cells():
    for severity in (1, 2, 3):
        for exposure in (1, 2, 3, 4):
            for controllability in (1, 2, 3):
                params = RiskParameters(severity, exposure, controllability)
                assert asil_from_sec(params) == table_oracle(
                    severity, exposure, controllability), params


def test_any_zero_class_forces_qm():
    assert asil_from_sec(RiskParameters(0, 4, 3)) is AsilLevel.QM
    assert asil_from_sec(RiskParameters(3, 0, 3)) is AsilLevel.QM
    assert asil_from_sec(RiskParameters(3, 4, 0)) is AsilLevel.QM
    assert asil_from_sec(RiskParameters(0, 0, 0)) is AsilLevel.QM


@pytest.mark.parametrize("params,expected", [
    (RiskParameters(3, 4, 3), AsilLevel.D),
    (RiskParameters(1, 4, 3), AsilLevel.B),
    (RiskParameters(2, 4, 3), AsilLevel.C),
    (RiskParameters(1, 1, 1), AsilLevel.QM),
])
def test_known_classifications(params, expected):
    assert asil_from_sec(params) is expected


@pytest.mark.parametrize("params,name", [
    (RiskParameters(4, 1, 1), "severity"),
    (RiskParameters(1, 5, 1), "exposure"),
    (RiskParameters(1, 1, 4), "controllability"),
    (RiskParameters(-1, 1, 1), "severity"),
])
def test_out_of_range_errors_name_the_parameter(params, name):
    with pytest.raises(ValueError, match=name):
        asil_from_sec(params)


def test_monotone_in_each_parameter():
    for s in range(4):
        for e in range(5):
            for c in range(4):
                base = asil_from_sec(RiskParameters(s, e, c))
                if s < 3:
                    assert asil_from_sec(RiskParameters(s + 1, e, c)) >= base
                if e < 4:
                    assert asil_from_sec(RiskParameters(s, e + 1, c)) >= base
                if c < 3:
                    assert asil_from_sec(RiskParameters(s, e, c + 1)) >= base


def test_rsil_mapping_rows():
    assert rsil_from_asil(AsilLevel.QM) == 0
    assert rsil_from_asil(AsilLevel.A) == 1
    assert rsil_from_asil(AsilLevel.B) == 2
    assert rsil_from_asil(AsilLevel.C) == 3
    assert rsil_from_asil(AsilLevel.D) == 4


def test_rsil_mapping_is_order_preserving_bijection():
    levels = sorted(AsilLevel)
    images = [rsil_from_asil(level) for level in levels]
    assert sorted(set(images)) == [0, 1, 2, 3, 4]
    assert images == sorted(images)


def _scenario(serial, kind=ScenarioKind.VEHICLE_DYNAMIC):
    return OperationalScenario(RecordId(RecordKind.OS, serial), kind, f"scenario {serial}")


def _malfunction(serial, component_serial=1):
    return Malfunction(RecordId(RecordKind.MF, serial),
                       RecordId(RecordKind.CMP, component_serial), f"malfunction {serial}")


def test_derivation_is_cartesian_product_by_default():
    scenarios = [_scenario(1), _scenario(2)]
    malfunctions = [_malfunction(1), _malfunction(2), _malfunction(3)]
    drafts = derive_hazardous_scenarios(scenarios, malfunctions)
    assert len(drafts) == 6
    assert all(d.assessment is None and d.hazard is None for d in drafts)
    pairs = [(d.scenario, d.malfunction) for d in drafts]
    assert pairs == sorted(pairs)
    assert [d.id.serial for d in drafts] == list(range(1, 7))


def test_derivation_with_empty_malfunctions_is_empty():
    assert derive_hazardous_scenarios([_scenario(1)], []) == []


def test_derivation_with_relevance_predicate():
    boarding = [_scenario(s, ScenarioKind.BOARDING) for s in (1, 2, 3)]
    dynamic = [_scenario(4)]
    lift_malfunctions = [_malfunction(1), _malfunction(2)]

    def boarding_only(scenario, malfunction):
        return scenario.kind is ScenarioKind.BOARDING

    drafts = derive_hazardous_scenarios(boarding + dynamic, lift_malfunctions,
                                        relevance=boarding_only)
    assert len(drafts) == 6
    scenario_ids = {d.scenario for d in drafts}
    assert all(s.id in scenario_ids for s in boarding)
    assert dynamic[0].id not in scenario_ids


def test_classify_fills_and_replaces_assessment():
    draft = HazardousScenario(RecordId(RecordKind.HS, 1),
                              RecordId(RecordKind.OS, 1), RecordId(RecordKind.MF, 1))
    assessed = classify(draft, RiskParameters(3, 4, 3))
    assert assessed.assessment.rsil == 4
    assert draft.assessment is None  # input untouched

    low = classify(assessed, RiskParameters(1, 1, 1))
    assert low.assessment.rsil == 0
    zero = classify(assessed, RiskParameters(0, 1, 1))
    assert zero.assessment.rsil == 0


def _summary_repo():
    repo = Repository()
    for serial, (status, params_list) in enumerate([
        (MitigationStatus.MEASURES_TESTED, [RiskParameters(1, 1, 1)]),       # RSIL 0
        (MitigationStatus.MEASURES_DEFINED, [RiskParameters(2, 3, 3)]),      # RSIL 2
        (MitigationStatus.OPEN, [RiskParameters(3, 4, 3)]),                  # RSIL 4
    ], start=1):
        hazard = Hazard(RecordId(RecordKind.HZ, serial), f"hazard {serial}", status)
        repo.add(hazard)
        for i, params in enumerate(params_list):
            draft = HazardousScenario(
                RecordId(RecordKind.HS, serial * 10 + i),
                RecordId(RecordKind.OS, 1), RecordId(RecordKind.MF, 1),
                hazard.id)
            repo.add(classify(draft, params))
    return repo


def test_hazard_log_summary_counts_and_unresolved():
    repo = _summary_repo()
    summary = hazard_log_summary(repo)
    assert summary.total == 3
    assert summary.rsil_counts[0] == 1
    assert summary.rsil_counts[2] == 1
    assert summary.rsil_counts[4] == 1
    assert sum(summary.rsil_counts.values()) == summary.total
    assert sum(summary.status_counts.values()) == summary.total
    assert [h.serial for h in summary.unresolved] == [2, 3]


def test_hazard_log_summary_empty_repo():
    summary = hazard_log_summary(Repository())
    assert summary == HazardLogSummary()


def test_hazard_counted_once_at_its_maximum_rsil():
    repo = Repository()
    hazard = Hazard(RecordId(RecordKind.HZ, 1), "two-scenario hazard",
                    MitigationStatus.MEASURES_TESTED)
    repo.add(hazard)
    repo.add(classify(HazardousScenario(RecordId(RecordKind.HS, 1),
                                        RecordId(RecordKind.OS, 1),
                                        RecordId(RecordKind.MF, 1), hazard.id),
                      RiskParameters(1, 4, 2)))   # RSIL 1
    repo.add(classify(HazardousScenario(RecordId(RecordKind.HS, 2),
                                        RecordId(RecordKind.OS, 1),
                                        RecordId(RecordKind.MF, 1), hazard.id),
                      RiskParameters(3, 3, 3)))   # RSIL 3
    summary = hazard_log_summary(repo)
    assert summary.total == 1
    assert summary.rsil_counts[3] == 1
    assert summary.rsil_counts[1] == 0


def test_hazard_log_summary_reports_dangling_reference():
    repo = Repository()
    repo.add(classify(HazardousScenario(RecordId(RecordKind.HS, 1),
                                        RecordId(RecordKind.OS, 1),
                                        RecordId(RecordKind.MF, 1),
                                        RecordId(RecordKind.HZ, 99)),
                      RiskParameters(1, 1, 1)))
    with pytest.raises(IntegrityError, match="HZ-0099"):
        hazard_log_summary(repo)


def test_summary_is_permutation_invariant(demo_repo):
    baseline = hazard_log_summary(demo_repo)
    shuffled = Repository()
    for hazard_id in reversed(sorted(demo_repo.hazards)):
        shuffled.add(demo_repo.hazards[hazard_id])
    for hs_id in reversed(sorted(demo_repo.hazardous_scenarios)):
        shuffled.add(demo_repo.hazardous_scenarios[hs_id])
    assert hazard_log_summary(shuffled) == baseline
