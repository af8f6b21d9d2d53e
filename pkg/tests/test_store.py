import json
import shutil

import pytest

from release_gate import store
from release_gate.fixtures import CMP_LIFT, build_demo
from release_gate.model import RecordId, RecordKind


def _record_files(root):
    return sorted(p for p in root.rglob("*.json") if p.name != "repo.json")


def test_load_save_load_round_trip(saved_demo):
    first = store.load(saved_demo)
    store.save(first)
    second = store.load(saved_demo)
    assert list(first.iter_records()) == list(second.iter_records())
    assert first.actors == second.actors
    assert first.journal == second.journal
    assert first.compositions == second.compositions
    assert first.stage_definitions == second.stage_definitions


def test_record_count_matches_file_count(saved_demo):
    repo = store.load(saved_demo)
    on_disk = len(_record_files(saved_demo)) - len(list((saved_demo / "actors").glob("*.json")))
    assert sum(1 for _ in repo.iter_records()) == on_disk


def test_saving_twice_is_byte_identical(saved_demo):
    before = {p: p.read_bytes() for p in saved_demo.rglob("*") if p.is_file()}
    store.save(store.load(saved_demo))
    after = {p: p.read_bytes() for p in saved_demo.rglob("*") if p.is_file()}
    assert before == after


def test_editing_one_record_changes_only_its_file(saved_demo):
    before = {p: p.read_bytes() for p in saved_demo.rglob("*.json") if p.is_file()}
    repo = store.load(saved_demo)
    hazard = repo.hazards[RecordId(RecordKind.HZ, 1)]
    hazard.description += " (revised)"
    changed = store.save(repo)
    assert changed == [saved_demo / "hazards" / "HZ-0001.json"]
    after = {p: p.read_bytes() for p in saved_demo.rglob("*.json") if p.is_file()}
    for path in before:
        if path.name == "HZ-0001.json":
            assert before[path] != after[path]
        else:
            assert before[path] == after[path]


def test_unknown_record_kind_tag_is_a_parse_error(saved_demo):
    rogue = saved_demo / "hazards" / "XX-0001.json"
    rogue.write_text('{"id": "XX-0001", "description": "?"}\n')
    with pytest.raises(store.ParseError, match="unknown record kind tag: 'XX'"):
        store.load(saved_demo)


def test_record_in_wrong_directory_is_a_parse_error(saved_demo):
    misplaced = saved_demo / "hazards" / "OS-0009.json"
    misplaced.write_text('{"id": "OS-0009", "kind": "Boarding", "description": "?"}\n')
    with pytest.raises(store.ParseError, match="does not belong in hazards/"):
        store.load(saved_demo)


def test_malformed_json_reports_file_and_line(saved_demo):
    path = saved_demo / "hazards" / "HZ-0001.json"
    text = path.read_text().splitlines()
    text[2] = '  "description": unquoted,'
    path.write_text("\n".join(text))
    with pytest.raises(store.ParseError) as err:
        store.load(saved_demo)
    assert err.value.line == 3
    assert "HZ-0001.json" in str(err.value)


def test_unknown_enum_value_names_the_field(saved_demo):
    path = saved_demo / "scenarios" / "OS-0001.json"
    obj = json.loads(path.read_text())
    obj["kind"] = "Flying"
    path.write_text(json.dumps(obj))
    with pytest.raises(store.ParseError) as err:
        store.load(saved_demo)
    assert err.value.field == "kind"
    assert "Flying" in str(err.value)


def test_dangling_reference_reports_all_offenders(saved_demo):
    crd_path = next(iter(sorted((saved_demo / "component-releases").glob("*.json"))))
    obj = json.loads(crd_path.read_text())
    obj["component"] = "CMP-0099"
    crd_path.write_text(json.dumps(obj))

    mf_path = saved_demo / "malfunctions" / "MF-0001.json"
    obj = json.loads(mf_path.read_text())
    obj["component"] = "CMP-0098"
    mf_path.write_text(json.dumps(obj))

    with pytest.raises(store.IntegrityError) as err:
        store.load(saved_demo)
    message = str(err.value)
    assert crd_path.stem in message and "CMP-0099" in message
    assert "MF-0001" in message and "CMP-0098" in message
    assert len(err.value.offenders) >= 2


def test_journal_is_append_only(saved_demo, tmp_path):
    journal_path = saved_demo / "journal.ndjson"
    before = journal_path.read_bytes()

    repo = store.load(saved_demo)
    from release_gate.engine import ProcessEngine
    from release_gate.events import EventKind

    engine = ProcessEngine(repo)
    engine.record_event("safety-lead", EventKind.SAFETY_DOCUMENTATION_UPDATED,
                        {"note": "appended"})
    store.save(repo)
    after = journal_path.read_bytes()
    assert after.startswith(before)
    assert after != before


def test_truncated_snapshot_journal_is_rejected(saved_demo):
    repo = store.load(saved_demo)
    repo.journal = repo.journal[:-1]
    with pytest.raises(store.JournalError, match="append-only"):
        store.save(repo)


def test_newer_schema_version_rejected(saved_demo):
    config_path = saved_demo / "repo.json"
    obj = json.loads(config_path.read_text())
    obj["schema_version"] = store.SCHEMA_VERSION + 1
    config_path.write_text(json.dumps(obj))
    with pytest.raises(store.ParseError, match="newer than supported"):
        store.load(saved_demo)


def test_seq_gap_in_journal_is_rejected(saved_demo):
    journal_path = saved_demo / "journal.ndjson"
    lines = journal_path.read_text().splitlines()
    del lines[3]
    journal_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(store.ParseError, match="contiguity"):
        store.load(saved_demo)


def test_load_is_insensitive_to_directory_order(tmp_path):
    left_root = tmp_path / "left"
    build_demo(left_root)
    right_root = tmp_path / "right"
    shutil.copytree(left_root, right_root)

    left = store.load(left_root)
    right = store.load(right_root)
    assert list(left.iter_records()) == list(right.iter_records())


def test_removed_record_file_is_deleted_on_save(saved_demo):
    repo = store.load(saved_demo)
    lift_releases = repo.releases_for(CMP_LIFT, 5)
    target = lift_releases[0]
    path = saved_demo / "component-releases" / f"{target.id}.json"
    assert path.exists()
    # also drop the journal? not needed: removal only affects record files
    repo.remove(target.id)
    store.save(repo)
    assert not path.exists()


def test_lock_blocks_second_writer(saved_demo):
    repo = store.load(saved_demo)
    with store.repository_lock(saved_demo):
        with pytest.raises(store.LockError, match="locked"):
            store.save(repo)


def test_init_refuses_existing_repository(saved_demo):
    with pytest.raises(store.StoreError, match="already contains"):
        store.init(saved_demo)
