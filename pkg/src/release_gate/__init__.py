"""Release-process-as-code engine for staged prototype demonstrations."""

from .engine import ProcessEngine, RecordInvalidError
from .model import (
    AsilLevel,
    RecordId,
    RecordKind,
    RiskParameters,
    Role,
    validate_record,
)
from .risk import asil_from_sec, classify, derive_hazardous_scenarios, rsil_from_asil
from .store import Repository, load, save
from .validation import ReadinessReport, ValidationIssue, readiness_report
from .workflow import WorkflowState, apply_event, grant_stage, mark_stale, replay

__version__ = "0.1.0"

__all__ = [
    "AsilLevel",
    "ProcessEngine",
    "ReadinessReport",
    "RecordId",
    "RecordInvalidError",
    "RecordKind",
    "Repository",
    "RiskParameters",
    "Role",
    "ValidationIssue",
    "WorkflowState",
    "apply_event",
    "asil_from_sec",
    "classify",
    "derive_hazardous_scenarios",
    "grant_stage",
    "load",
    "mark_stale",
    "readiness_report",
    "replay",
    "rsil_from_asil",
    "save",
    "validate_record",
    "__version__",
]
