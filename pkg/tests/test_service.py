"""Experiment service: sequencing, durability, and the HTTP contract."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from contour_bench.pipeline import PipelineConfig, build_dataset, discover_sources
from contour_bench.placement import LEVELS
from contour_bench.service import ExperimentStore, SessionError, create_app
from contour_bench.synth import write_source_tree

FAST_CONFIG = PipelineConfig(canvas=128, pixels_per_degree=16.0)


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    write_source_tree(root / "src", per_category=1)
    sources = discover_sources(root / "src")[:3]
    build_dataset(sources, FAST_CONFIG, root / "data")
    return root


@pytest.fixture()
def store(small_dataset, tmp_path):
    s = ExperimentStore(small_dataset / "data", tmp_path / "sessions")
    yield s
    s.close()


def drive_session(store, group="phosphene"):
    session = store.create_session(group)
    while True:
        trial = store.next_trial(session.session_id)
        if trial["done"]:
            break
        store.record_response(session.session_id, trial["trial_index"],
                              "banana", 321.0)
    return session


class TestSequencing:
    def test_sequence_length(self, store):
        session = store.create_session("segment")
        # 3 sources: 9 levels x 3 + 3 contour + 3 rgb
        assert len(session.sequence) == 9 * 3 + 3 + 3

    def test_ascending_levels_then_tail(self, store):
        session = store.create_session("phosphene")
        levels = [slot.level for slot in session.sequence]
        fragmented = [l for l in levels if l is not None]
        assert fragmented == sorted(fragmented)
        tail = [slot.condition for slot in session.sequence if slot.level is None]
        assert tail == ["contour"] * 3 + ["rgb"] * 3
        assert all(slot.condition == "phosphene"
                   for slot in session.sequence if slot.level is not None)

    def test_first_trial_is_level_12(self, store):
        session = store.create_session("segment")
        trial = store.next_trial(session.session_id)
        assert trial["trial_index"] == 0
        assert trial["level"] == LEVELS[0]

    def test_alternating_group_assignment(self, store):
        groups = [store.create_session().group for _ in range(6)]
        assert groups.count("phosphene") == groups.count("segment") == 3
        for i in range(0, 6, 2):
            assert {groups[i], groups[i + 1]} == {"phosphene", "segment"}

    def test_trial_descriptor_fields(self, store):
        session = store.create_session("phosphene")
        trial = store.next_trial(session.session_id)
        assert trial["stimulus_duration_ms"] == 200
        assert trial["mask_duration_ms"] == 200
        assert len(trial["labels"]) == 12
        assert trial["stimulus_url"].startswith("/stimuli/")
        assert trial["mask_url"].startswith("/masks/")

    def test_next_trial_idempotent(self, store):
        session = store.create_session("phosphene")
        assert (store.next_trial(session.session_id)
                == store.next_trial(session.session_id))

    def test_fresh_masks_across_trials(self, store):
        session = store.create_session("phosphene")
        first = store.next_trial(session.session_id)["mask_url"]
        store.record_response(session.session_id, 0, "banana", 100.0)
        second = store.next_trial(session.session_id)["mask_url"]
        assert first != second


class TestResponses:
    def test_correct_flag_and_cursor(self, store):
        session = store.create_session("segment")
        slot = session.sequence[0]
        ack = store.record_response(session.session_id, 0,
                                    slot.true_category, 450.0)
        assert ack["correct"] is True
        assert ack["cursor"] == 1

    def test_duplicate_submission_conflicts(self, store):
        session = store.create_session("segment")
        store.record_response(session.session_id, 0, "banana", 1.0)
        with pytest.raises(SessionError) as err:
            store.record_response(session.session_id, 0, "banana", 1.0)
        assert err.value.status_code == 409

    def test_out_of_order_conflicts(self, store):
        session = store.create_session("segment")
        with pytest.raises(SessionError) as err:
            store.record_response(session.session_id, 5, "banana", 1.0)
        assert err.value.status_code == 409

    def test_unknown_choice_rejected(self, store):
        session = store.create_session("segment")
        with pytest.raises(SessionError) as err:
            store.record_response(session.session_id, 0, "zebra", 1.0)
        assert err.value.status_code == 422

    def test_terminal_marker_after_completion(self, store):
        session = drive_session(store)
        trial = store.next_trial(session.session_id)
        assert trial["done"] is True


class TestDurability:
    def test_acked_responses_survive_restart(self, small_dataset, tmp_path):
        sessions_dir = tmp_path / "sessions"
        store = ExperimentStore(small_dataset / "data", sessions_dir)
        session = store.create_session("phosphene")
        for i in range(5):
            trial = store.next_trial(session.session_id)
            store.record_response(session.session_id, trial["trial_index"],
                                  "cup", 10.0 + i)
        store.close()  # crash boundary: only fsynced lines exist

        revived = ExperimentStore(small_dataset / "data", sessions_dir)
        restored = revived._get(session.session_id)
        assert restored.cursor == 5
        assert restored.group == "phosphene"
        # identical remaining sequence: continue without gaps or duplicates
        trial = revived.next_trial(session.session_id)
        assert trial["trial_index"] == 5
        indices = [e["trial_index"] for e in restored.responses]
        assert indices == list(range(5))
        assert [s.stimulus_id for s in restored.sequence] \
            == [s.stimulus_id for s in store._get(session.session_id).sequence]
        revived.close()

    def test_log_lines_are_json(self, small_dataset, tmp_path):
        store = ExperimentStore(small_dataset / "data", tmp_path / "s")
        session = store.create_session("segment")
        store.record_response(session.session_id, 0, "banana", 5.0)
        log = (tmp_path / "s" / f"{session.session_id}.jsonl").read_text()
        events = [json.loads(line) for line in log.splitlines()]
        assert events[0]["event"] == "created"
        assert events[1]["event"] == "response"
        store.close()


class TestExport:
    def test_partial_sessions_excluded_by_default(self, store):
        session = store.create_session("phosphene")
        store.record_response(session.session_id, 0, "banana", 1.0)
        table = store.export_responses()
        assert table.empty
        partial = store.export_responses(include_partial=True)
        assert len(partial) == 1

    def test_complete_session_row_count(self, store):
        drive_session(store, "segment")
        table = store.export_responses()
        assert len(table) == 9 * 3 + 3 + 3
        assert list(table.columns) == ["id", "condition", "level", "stimulus",
                                       "true", "choice", "correct", "rt_ms"]

    def test_levels_sorted_within_fragmented_block(self, store):
        drive_session(store, "phosphene")
        table = store.export_responses()
        fragmented = table[table["condition"] == "phosphene"]["level"].tolist()
        assert fragmented == sorted(fragmented)

    def test_no_sessions_header_only(self, store):
        table = store.export_responses()
        assert table.empty


class TestHttpContract:
    def test_full_http_lifecycle(self, small_dataset, tmp_path):
        store = ExperimentStore(small_dataset / "data", tmp_path / "sessions")
        client = TestClient(create_app(store))

        created = client.post("/api/session", json={"group": "segment"})
        assert created.status_code == 200
        sid = created.json()["session_id"]

        trial = client.get(f"/api/session/{sid}/trial").json()
        assert trial["trial_index"] == 0

        stimulus = client.get(trial["stimulus_url"])
        assert stimulus.status_code == 200
        assert stimulus.content[:8] == b"\x89PNG\r\n\x1a\n"

        mask = client.get(trial["mask_url"])
        assert mask.status_code == 200
        assert mask.content[:8] == b"\x89PNG\r\n\x1a\n"

        ack = client.post(f"/api/session/{sid}/response",
                          json={"trial_index": 0, "choice": "cup",
                                "rt_ms": 123.0})
        assert ack.status_code == 200
        assert ack.json()["cursor"] == 1

        duplicate = client.post(f"/api/session/{sid}/response",
                                json={"trial_index": 0, "choice": "cup",
                                      "rt_ms": 123.0})
        assert duplicate.status_code == 409

        bad_choice = client.post(f"/api/session/{sid}/response",
                                 json={"trial_index": 1, "choice": "zebra",
                                       "rt_ms": 1.0})
        assert bad_choice.status_code == 422

        export = client.get("/api/export.csv?include_partial=true")
        assert export.status_code == 200
        assert export.text.splitlines()[0] \
            == "id,condition,level,stimulus,true,choice,correct,rt_ms"
        store.close()

    def test_unknown_session_404(self, small_dataset, tmp_path):
        store = ExperimentStore(small_dataset / "data", tmp_path / "sessions")
        client = TestClient(create_app(store))
        assert client.get("/api/session/deadbeef/trial").status_code == 404
        store.close()

    def test_missing_manifest_503(self, tmp_path):
        store = ExperimentStore(tmp_path / "nodata", tmp_path / "sessions")
        client = TestClient(create_app(store))
        response = client.post("/api/session", json={})
        assert response.status_code == 503
        store.close()

    def test_stimuli_path_traversal_blocked(self, small_dataset, tmp_path):
        store = ExperimentStore(small_dataset / "data", tmp_path / "sessions")
        client = TestClient(create_app(store))
        response = client.get("/stimuli/../../etc/passwd")
        assert response.status_code in (404, 422)
        store.close()

    def test_ui_hosting_when_configured(self, small_dataset, tmp_path):
        ui = tmp_path / "ui"
        (ui / "dist").mkdir(parents=True)
        (ui / "index.html").write_text("<html>runner</html>")
        (ui / "dist" / "main.js").write_text("export {};")
        store = ExperimentStore(small_dataset / "data", tmp_path / "sessions")
        client = TestClient(create_app(store, ui_dir=ui))
        assert client.get("/").text == "<html>runner</html>"
        assert client.get("/dist/main.js").status_code == 200
        assert client.get("/dist/../index.html").status_code in (404, 422)
        store.close()


class TestPractice:
    def test_practice_block_prepended_and_excluded_from_export(
            self, small_dataset, tmp_path):
        store = ExperimentStore(small_dataset / "data", tmp_path / "sessions",
                                practice_dir=small_dataset / "data")
        session = store.create_session("phosphene")
        practice = [slot for slot in session.sequence if slot.practice]
        assert 0 < len(practice) <= 24
        assert all(s.practice for s in session.sequence[:len(practice)])
        while True:
            trial = store.next_trial(session.session_id)
            if trial["done"]:
                break
            store.record_response(session.session_id, trial["trial_index"],
                                  "banana", 1.0)
        table = store.export_responses()
        assert len(table) == len(session.sequence) - len(practice)
        store.close()
