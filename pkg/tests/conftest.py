from __future__ import annotations

import pytest

from release_gate.engine import ProcessEngine
from release_gate.fixtures import build_demo, build_records


@pytest.fixture
def demo_engine() -> ProcessEngine:
    """Full walkthrough in memory: autoELF granted stages 1..5."""
    return build_demo()


@pytest.fixture
def demo_repo(demo_engine):
    return demo_engine.repo


@pytest.fixture
def records_only_repo():
    """All demo records, no workflow events yet."""
    return build_records()


@pytest.fixture
def saved_demo(tmp_path):
    """Demo walkthrough persisted to disk; returns the repository root."""
    root = tmp_path / "repo"
    build_demo(root)
    return root
