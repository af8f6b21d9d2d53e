"""Risk classification: S/E/C classes to ASIL to RSIL, hazard derivation,
and the hazard log summary."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable

from .model import (
    AsilLevel,
    Hazard,
    HazardousScenario,
    Malfunction,
    MitigationStatus,
    OperationalScenario,
    RecordId,
    RecordKind,
    RiskAssessment,
    RiskParameters,
)

if TYPE_CHECKING:  # pragma: no cover
    from .store import Repository


class IntegrityError(Exception):
    """A cross-reference does not resolve; carries every offending id."""

    def __init__(self, offenders: list[str]):
        self.offenders = offenders
        super().__init__("dangling references: " + "; ".join(offenders))


def asil_from_sec(params: RiskParameters) -> AsilLevel:
    """Determine the ASIL from severity, exposure, and controllability classes.

    Any class 0 means no integrity requirement (QM); otherwise the level is
    the clamped index S+E+C-6, i.e. QM for sums up to 6 and A/B/C/D for
    sums 7/8/9/10.
    """
    if params.severity not in range(0, 4):
        raise ValueError(f"severity class must be in 0..3, got {params.severity}")
    if params.exposure not in range(0, 5):
        raise ValueError(f"exposure class must be in 0..4, got {params.exposure}")
    if params.controllability not in range(0, 4):
        raise ValueError(f"controllability class must be in 0..3, got {params.controllability}")
    if 0 in (params.severity, params.exposure, params.controllability):
        return AsilLevel.QM
    index = params.severity + params.exposure + params.controllability - 6
    return AsilLevel(max(index, 0))


_RSIL_BY_ASIL = {
    AsilLevel.QM: 0,
    AsilLevel.A: 1,
    AsilLevel.B: 2,
    AsilLevel.C: 3,
    AsilLevel.D: 4,
}

# Verbal risk scale per RSIL band, used by reports and the dashboard.
RSIL_WORDING = {
    0: "no additional measures required",
    1: "very low",
    2: "low",
    3: "high",
    4: "very high",
}


def rsil_from_asil(asil: AsilLevel) -> int:
    """Convert an ASIL to the project-internal 0..4 integrity scale."""
    return _RSIL_BY_ASIL[asil]


def derive_hazardous_scenarios(
    scenarios: list[OperationalScenario],
    malfunctions: list[Malfunction],
    relevance: Callable[[OperationalScenario, Malfunction], bool] | None = None,
    start_serial: int = 1,
) -> list[HazardousScenario]:
    """Couple operational scenarios with component malfunctions.

    Emits one unassessed draft per relevant pair, ordered by scenario id then
    malfunction id; ids are allocated sequentially from ``start_serial``.
    The default relevance predicate pairs everything with everything.
    """
    drafts: list[HazardousScenario] = []
    serial = start_serial
    for scenario in sorted(scenarios, key=lambda s: s.id):
        for malfunction in sorted(malfunctions, key=lambda m: m.id):
            if relevance is not None and not relevance(scenario, malfunction):
                continue
            drafts.append(HazardousScenario(
                id=RecordId(RecordKind.HS, serial),
                scenario=scenario.id,
                malfunction=malfunction.id,
            ))
            serial += 1
    return drafts


def classify(hs: HazardousScenario, params: RiskParameters) -> HazardousScenario:
    """Fill in (or replace) the risk assessment of a hazardous scenario."""
    asil = asil_from_sec(params)
    assessment = RiskAssessment(parameters=params, asil=asil, rsil=rsil_from_asil(asil))
    return replace(hs, assessment=assessment)


def hazard_rsil(repo: "Repository", hazard_id: RecordId) -> int:
    """A hazard's RSIL is the maximum over its assessed hazardous scenarios."""
    rsils = [hs.assessment.rsil for hs in repo.hazardous_scenarios.values()
             if hs.hazard == hazard_id and hs.assessment is not None]
    return max(rsils, default=0)


@dataclass
class HazardLogSummary:
    """Hazard counts by RSIL band and mitigation status, plus the hazards
    with integrity requirements that are not fully mitigated yet."""

    total: int = 0
    rsil_counts: dict[int, int] = field(default_factory=lambda: {n: 0 for n in range(5)})
    status_counts: dict[MitigationStatus, int] = field(
        default_factory=lambda: {s: 0 for s in MitigationStatus})
    unresolved: list[RecordId] = field(default_factory=list)


def hazard_log_summary(repo: "Repository") -> HazardLogSummary:
    """Summarize the hazard log; raises IntegrityError on dangling references."""
    dangling = [f"{hs.id}: hazard {hs.hazard} does not resolve"
                for hs in sorted(repo.hazardous_scenarios.values(), key=lambda h: h.id)
                if hs.hazard is not None and repo.find(hs.hazard) is None]
    if dangling:
        raise IntegrityError(dangling)

    summary = HazardLogSummary()
    for hazard_id in sorted(repo.hazards):
        hazard: Hazard = repo.hazards[hazard_id]
        rsil = hazard_rsil(repo, hazard_id)
        summary.total += 1
        summary.rsil_counts[rsil] += 1
        summary.status_counts[hazard.mitigation_status] += 1
        if rsil >= 1 and hazard.mitigation_status is not MitigationStatus.MEASURES_TESTED:
            summary.unresolved.append(hazard_id)
    return summary
