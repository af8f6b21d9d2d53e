import pytest
from fastapi.testclient import TestClient

from release_gate.fixtures import build_demo
from release_gate.service import create_app

TOKENS = {
    "tok-committee": "committee-chair",
    "tok-auditor": "auditor",
    "tok-developer": "dev-perception",
}


@pytest.fixture
def client(tmp_path):
    root = tmp_path / "repo"
    build_demo(root, decide_final=False)
    app = create_app(root, TOKENS)
    with TestClient(app) as test_client:
        yield test_client


def _auth(token):
    return {"Authorization": f"Bearer {token}"}


def _elf_row(client):
    rows = client.get("/api/prototypes").json()["prototypes"]
    return next(r for r in rows if r["name"] == "autoELF")


def test_prototype_grid_shows_stage5_ready(client):
    row = _elf_row(client)
    assert row["granted"] == [1, 2, 3, 4]
    cell = row["stages"][4]
    assert cell["status"] == "Ready"
    assert cell["compiled"] is True


def test_readiness_endpoint(client):
    report = client.get("/api/readiness/PRO-0003/5").json()
    assert report["ready"] is True
    assert report["issues"] == []

    report = client.get("/api/readiness/PRO-0001/3").json()
    assert report["ready"] is False
    assert report["counts"]["MissingReview"] == 1


def test_readiness_unknown_prototype_is_404(client):
    assert client.get("/api/readiness/PRO-0099/3").status_code == 404


def test_hazard_log_endpoint(client):
    log = client.get("/api/hazard-log").json()
    assert log["total"] == 4
    assert {row["rsil"] for row in log["rows"]} == {0, 1, 2, 4}


def test_traceability_endpoint(client):
    body = client.get("/api/traceability").json()
    assert body["issues"] == []
    assert all(row["complete"] for row in body["rows"])


def test_document_endpoint(client):
    document = client.get("/api/document/PRO-0003/5").json()
    assert document["prototype_name"] == "autoELF"
    assert len(document["components_section"]) == 5


def test_journal_endpoint(client):
    events = client.get("/api/journal").json()["events"]
    assert events[0]["seq"] == 1
    assert [e["seq"] for e in events] == list(range(1, len(events) + 1))


def test_committee_decision_grants_stage5(client):
    response = client.post("/api/decisions", json={
        "prototype": "PRO-0003", "stage": 5,
    }, headers=_auth("tok-committee"))
    assert response.status_code == 200, response.text
    body = response.json()
    assert body["granted"] == [1, 2, 3, 4, 5]

    # read-your-writes: the grid reflects the new grant
    row = _elf_row(client)
    assert row["stages"][4]["status"] == "Granted"
    events = client.get("/api/journal").json()["events"]
    assert events[-1]["kind"] == "ReleaseDecided"


def test_developer_token_cannot_decide(client):
    response = client.post("/api/decisions", json={
        "prototype": "PRO-0003", "stage": 5,
    }, headers=_auth("tok-developer"))
    assert response.status_code == 403
    assert "ReleaseCommittee" in response.json()["detail"]


def test_unknown_token_is_401(client):
    for headers in ({}, _auth("tok-nobody")):
        response = client.post("/api/decisions", json={
            "prototype": "PRO-0003", "stage": 5,
        }, headers=headers)
        assert response.status_code == 401


def test_stage_skip_is_409_with_reason(tmp_path):
    root = tmp_path / "early"
    build_demo(root, through_stage=3, decide_final=False)
    with TestClient(create_app(root, TOKENS)) as client:
        response = client.post("/api/decisions", json={
            "prototype": "PRO-0003", "stage": 5,
        }, headers=_auth("tok-committee"))
        assert response.status_code == 409
        assert "stage 4" in response.json()["detail"]["message"]


def test_blocked_decision_embeds_readiness_report(tmp_path):
    root = tmp_path / "blocked"
    engine = build_demo(root, decide_final=False)
    engine.mark_component_stale(next(iter(
        c for c in engine.repo.components if str(c) == "CMP-0005")))
    engine.save()
    with TestClient(create_app(root, TOKENS)) as client:
        response = client.post("/api/decisions", json={
            "prototype": "PRO-0003", "stage": 5,
        }, headers=_auth("tok-committee"))
        assert response.status_code == 409
        detail = response.json()["detail"]
        assert detail["report"]["counts"]["StaleRelease"] == 1


def test_malformed_payload_is_422(client):
    response = client.post("/api/decisions", json={"prototype": "PRO-0003"},
                           headers=_auth("tok-committee"))
    assert response.status_code == 422

    response = client.post("/api/decisions", json={
        "prototype": "not-an-id", "stage": 5,
    }, headers=_auth("tok-committee"))
    assert response.status_code == 422

    response = client.post("/api/decisions", json={
        "prototype": "PRO-0003", "stage": 5, "verdict": "Maybe",
    }, headers=_auth("tok-committee"))
    assert response.status_code == 422


def test_agency_posts_review(tmp_path):
    root = tmp_path / "review"
    build_demo(root, through_stage=3, decide_final=False)
    with TestClient(create_app(root, TOKENS)) as client:
        response = client.post("/api/reviews", json={
            "prototype": "PRO-0001", "stage": 1,
            "recommendation": "For", "notes": "evidence reviewed",
        }, headers=_auth("tok-auditor"))
        assert response.status_code == 200
        assert response.json()["review"].startswith("RVW-")

        response = client.post("/api/reviews", json={
            "prototype": "PRO-0001", "stage": 1, "recommendation": "For",
        }, headers=_auth("tok-developer"))
        assert response.status_code == 403


def test_successful_post_appends_exactly_one_event(client):
    before = len(client.get("/api/journal").json()["events"])
    client.post("/api/decisions", json={"prototype": "PRO-0003", "stage": 5},
                headers=_auth("tok-committee"))
    after = len(client.get("/api/journal").json()["events"])
    assert after == before + 1

    # blocked attempt appends nothing
    client.post("/api/decisions", json={"prototype": "PRO-0001", "stage": 3},
                headers=_auth("tok-committee"))
    assert len(client.get("/api/journal").json()["events"]) == after


def test_gets_never_mutate(client):
    before = len(client.get("/api/journal").json()["events"])
    client.get("/api/prototypes")
    client.get("/api/readiness/PRO-0003/5")
    client.get("/api/document/PRO-0003/5")
    client.get("/api/hazard-log")
    client.get("/api/traceability")
    assert len(client.get("/api/journal").json()["events"]) == before


def test_responses_byte_identical_for_identical_state(client):
    first = client.get("/api/prototypes").content
    second = client.get("/api/prototypes").content
    assert first == second
