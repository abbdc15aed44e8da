"""HTTP endpoints, error mapping, and crash-restart durability."""

import json

import pytest
from fastapi.testclient import TestClient

from conftest import bundled_tree_text
from triagebot import errors
from triagebot.api import ERROR_MAP, create_app, status_for
from triagebot.service import TriageService


@pytest.fixture()
def service(tmp_path):
    return TriageService(tmp_path / "data")


@pytest.fixture()
def client(service):
    return TestClient(create_app(service))


@pytest.fixture()
def loaded_client(client):
    response = client.post(
        "/tables/import", content=bundled_tree_text(), headers={"Content-Type": "text/csv"}
    )
    assert response.status_code == 200
    return client


class TestSessions:
    def test_create_session_returns_root_prompt(self, loaded_client):
        response = loaded_client.post("/sessions")
        assert response.status_code == 201
        body = response.json()
        assert body["prompt"] == "Software Incident?"
        assert body["session_id"]

    def test_no_active_table_conflict(self, client):
        response = client.post("/sessions")
        assert response.status_code == 409
        assert response.json()["code"] == "NoActiveTable"

    def test_two_sessions_distinct(self, loaded_client):
        a = loaded_client.post("/sessions").json()["session_id"]
        b = loaded_client.post("/sessions").json()["session_id"]
        assert a != b

    def test_yes_at_root(self, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        response = loaded_client.post(f"/sessions/{sid}/messages", json={"text": "yes"})
        assert response.status_code == 200
        body = response.json()
        assert body["reply"] == "Is the Software unavailable?"
        assert body["terminal"] is False
        assert body["intention_id"] == "intention-02"

    def test_fallback_reply(self, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        body = loaded_client.post(f"/sessions/{sid}/messages", json={"text": "zzz"}).json()
        assert body["fallback"] is True
        assert body["reply"].startswith("Sorry, I didn't understand.")

    def test_message_to_closed_session_gone(self, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        loaded_client.post(f"/sessions/{sid}/messages", json={"text": "no"})
        response = loaded_client.post(f"/sessions/{sid}/messages", json={"text": "yes"})
        assert response.status_code == 410

    def test_unknown_session_404(self, loaded_client):
        assert loaded_client.post("/sessions/nope/messages", json={"text": "hi"}).status_code == 404
        assert loaded_client.get("/sessions/nope").status_code == 404

    def test_fresh_session_transcript_has_one_turn(self, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        body = loaded_client.get(f"/sessions/{sid}").json()
        assert len(body["turns"]) == 1
        assert body["turns"][0]["direction"] == "bot"

    def test_terminal_turn_emits_notification(self, service, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        loaded_client.post(f"/sessions/{sid}/messages", json={"text": "yes"})
        body = loaded_client.post(f"/sessions/{sid}/messages", json={"text": "yes"}).json()
        assert body["event"] == "NotifyResponsible"
        records = service.notifier.records
        assert len(records) == 1
        assert records[0].session_id == sid
        assert records[0].delivered is True


class TestTables:
    def test_import_bundled_tree_ok_with_warning(self, client):
        response = client.post(
            "/tables/import", content=bundled_tree_text(), headers={"Content-Type": "text/csv"}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is True
        warnings = [f for f in body["findings"] if f["severity"] == "warning"]
        assert len(warnings) == 1
        assert body["version"] == 1

    def test_import_dangling_target_unprocessable(self, client):
        bad = (
            "intention,response,condition,action\n"
            "Intention 01,Q?,Yes,Proceed for intention 02\n"
        )
        response = client.post(
            "/tables/import", content=bad, headers={"Content-Type": "text/csv"}
        )
        assert response.status_code == 422
        codes = {f["code"] for f in response.json()["findings"]}
        assert "DanglingReference" in codes

    def test_import_binary_garbage_bad_request(self, client):
        response = client.post(
            "/tables/import", content=b"\xff\xfe\x00garbage", headers={"Content-Type": "text/csv"}
        )
        assert response.status_code == 400

    def test_active_table_404_when_none(self, client):
        response = client.get("/tables/active")
        assert response.status_code == 404
        assert response.json()["code"] == "NoActiveTable"

    def test_active_table_projection(self, loaded_client):
        body = loaded_client.get("/tables/active").json()
        assert body["root"] == "intention-01"
        assert len(body["intentions"]) == 8

    def test_reimport_bumps_version(self, loaded_client):
        response = loaded_client.post(
            "/tables/import", content=bundled_tree_text(), headers={"Content-Type": "text/csv"}
        )
        assert response.json()["version"] == 2

    def test_json_import_by_content_type(self, loaded_client):
        exported = loaded_client.get("/tables/active").json()
        response = loaded_client.post(
            "/tables/import",
            content=json.dumps(exported),
            headers={"Content-Type": "application/json"},
        )
        assert response.status_code == 200


class TestIncidents:
    def test_open_and_drive_lifecycle(self, client):
        body = client.post(
            "/incidents",
            json={"type": "Software Unavailable", "description": "dashboard times out"},
        ).json()
        incident_id = body["id"]
        assert body["state"] == "Reported"
        for event in ("triaged", "assigned", "correction_applied", "validation_started"):
            response = client.post(f"/incidents/{incident_id}/events", json={"event": event})
            assert response.status_code == 200
        body = client.post(
            f"/incidents/{incident_id}/events",
            json={"event": "validated_ok", "actor": "end-user"},
        ).json()
        assert body["state"] == "Resolved"

    def test_illegal_event_conflict(self, client):
        incident_id = client.post(
            "/incidents", json={"type": "Software Unavailable", "description": "x"}
        ).json()["id"]
        response = client.post(f"/incidents/{incident_id}/events", json={"event": "closed"})
        assert response.status_code == 409
        assert response.json()["code"] == "IllegalTransition"

    def test_unknown_type_unprocessable(self, client):
        response = client.post("/incidents", json={"type": "Gremlins", "description": "x"})
        assert response.status_code == 422

    def test_unknown_incident_404(self, client):
        assert client.get("/incidents/nope").status_code == 404


class TestReports:
    def test_empty_report(self, client):
        body = client.get("/reports/fallbacks?from=0&to=99999999999").json()
        assert body["total"] == 0
        assert body["per_intention"] == {}

    def test_report_counts_fallbacks(self, loaded_client):
        sid = loaded_client.post("/sessions").json()["session_id"]
        loaded_client.post(f"/sessions/{sid}/messages", json={"text": "hrm"})
        body = loaded_client.get("/reports/fallbacks?from=0&to=99999999999").json()
        assert body["total"] == 1
        assert body["per_intention"] == {"intention-01": 1}

    def test_bad_window_param(self, client):
        response = client.get("/reports/fallbacks?from=zzz&to=1")
        assert response.status_code == 400


class TestErrorMapping:
    def test_every_enumerated_error_is_mapped(self):
        enumerated = [
            obj
            for name, obj in vars(errors).items()
            if isinstance(obj, type)
            and issubclass(obj, errors.TriagebotError)
        ]
        for klass in enumerated:
            if klass is errors.IllegalTransition:
                exc = klass("Reported", "closed")
            else:
                exc = klass("boom")
            assert status_for(exc) in (400, 404, 409, 410, 422, 500)
        # direct mappings exist for everything except the base class fallback
        unmapped = [k for k in enumerated if k not in ERROR_MAP]
        assert unmapped == []

    def test_api_engine_equivalence(self, tmp_path, cfg):
        # The same interaction sequence through HTTP and through direct
        # engine calls yields identical transcript projections (ids and
        # timestamps aside, which are per-session).
        from triagebot.engine import DialogEngine
        from triagebot.improvement import FallbackStore
        from triagebot.model import parse_table

        service = TriageService(tmp_path / "api-data")
        client = TestClient(create_app(service))
        client.post("/tables/import", content=bundled_tree_text(),
                    headers={"Content-Type": "text/csv"})
        sid = client.post("/sessions").json()["session_id"]
        words = ["yes", "hrm?", "no", "yes"]
        for word in words:
            client.post(f"/sessions/{sid}/messages", json={"text": word})
        via_http = client.get(f"/sessions/{sid}").json()

        engine = DialogEngine(cfg, fallback_store=FallbackStore())
        table = parse_table(bundled_tree_text())
        session, _ = engine.start_session(table)
        for word in words:
            engine.advance(session.id, word)

        def comparable(turns):
            return [
                (t["direction"], t["text"], t["fallback"],
                 (t["match"] or {}).get("key"))
                for t in turns
            ]

        direct = [t.to_dict() for t in session.transcript]
        assert comparable(via_http["turns"]) == comparable(direct)
        assert via_http["current"] == session.current
        assert via_http["closed"] == session.closed


class TestDurability:
    def scenario(self, tmp_path):
        data_dir = tmp_path / "durable"
        service = TriageService(data_dir, clock=TickClock())
        client = TestClient(create_app(service))
        client.post("/tables/import", content=bundled_tree_text(),
                    headers={"Content-Type": "text/csv"})

        finished = client.post("/sessions").json()["session_id"]
        for word in ("yes", "yes"):
            client.post(f"/sessions/{finished}/messages", json={"text": word})

        open_session = client.post("/sessions").json()["session_id"]
        client.post(f"/sessions/{open_session}/messages", json={"text": "yes"})
        client.post(f"/sessions/{open_session}/messages", json={"text": "hrm?"})

        incident_id = client.post(
            "/incidents", json={"type": "Incomplete report", "description": "blank"}
        ).json()["id"]
        client.post(f"/incidents/{incident_id}/events", json={"event": "triaged"})

        return data_dir, client, finished, open_session, incident_id

    def test_restart_recovers_everything_byte_identically(self, tmp_path):
        data_dir, client, finished, open_session, incident_id = self.scenario(tmp_path)

        snapshots = {
            "finished": client.get(f"/sessions/{finished}").content,
            "open": client.get(f"/sessions/{open_session}").content,
            "incident": client.get(f"/incidents/{incident_id}").content,
            "table": client.get("/tables/active").content,
            "report": client.get("/reports/fallbacks?from=0&to=99999999999").content,
        }

        # No shutdown hook: a new service over the same directory is exactly
        # the kill-and-restart scenario.
        revived = TestClient(create_app(TriageService(data_dir, clock=TickClock())))
        assert revived.get(f"/sessions/{finished}").content == snapshots["finished"]
        assert revived.get(f"/sessions/{open_session}").content == snapshots["open"]
        assert revived.get(f"/incidents/{incident_id}").content == snapshots["incident"]
        assert revived.get("/tables/active").content == snapshots["table"]
        assert (
            revived.get("/reports/fallbacks?from=0&to=99999999999").content
            == snapshots["report"]
        )

    def test_restarted_service_continues_open_sessions(self, tmp_path):
        data_dir, _, _, open_session, _ = self.scenario(tmp_path)
        revived = TestClient(create_app(TriageService(data_dir, clock=TickClock())))
        body = revived.post(
            f"/sessions/{open_session}/messages", json={"text": "yes"}
        ).json()
        assert body["terminal"] is True
        assert body["event"] == "NotifyResponsible"

    def test_closed_sessions_stay_closed_after_restart(self, tmp_path):
        data_dir, _, finished, _, _ = self.scenario(tmp_path)
        revived = TestClient(create_app(TriageService(data_dir, clock=TickClock())))
        response = revived.post(f"/sessions/{finished}/messages", json={"text": "yes"})
        assert response.status_code == 410

    def test_notifications_not_redispatched_after_restart(self, tmp_path):
        data_dir, _, _, _, _ = self.scenario(tmp_path)
        revived_service = TriageService(data_dir, clock=TickClock())
        assert len(revived_service.notifier.records) == 1


class TickClock:
    """Deterministic strictly increasing clock for byte-stable timestamps."""

    counter = 0.0

    def __call__(self):
        TickClock.counter += 1.0
        return TickClock.counter
