"""HTTP service: sessions, operations, pattern runs, and replay equivalence."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from archevol import fixtures
from archevol.model import Architecture
from archevol.patterns import DecisionScript, client_server_pattern, run_pattern
from archevol.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def client():
    return TestClient(create_app())


def new_session(client, arch=None) -> tuple[str, int]:
    doc = (arch or fixtures.eshop()).to_dict()
    r = client.post("/sessions", json=doc)
    assert r.status_code == 201, r.text
    body = r.json()
    return body["sessionId"], body["revision"]


class TestSessions:
    def test_create_and_fetch(self, client):
        sid, rev = new_session(client)
        r = client.get(f"/sessions/{sid}/architecture")
        assert r.status_code == 200
        body = r.json()
        assert body["revision"] == rev == 0
        assert Architecture.from_dict(body["architecture"]).same_structure(
            fixtures.eshop())
        assert ["Customer", "Order"] in body["connectsTo"]

    def test_malformed_document_rejected(self, client):
        assert client.post("/sessions", json={"name": "x"}).status_code == 400

    def test_invalid_architecture_rejected(self, client):
        doc = fixtures.eshop().to_dict()
        doc["components"].append(doc["components"][0])
        assert client.post("/sessions", json=doc).status_code == 400

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/zz/architecture").status_code == 404


class TestOps:
    def test_apply_operation_bumps_revision(self, client):
        sid, rev = new_session(client)
        r = client.post(f"/sessions/{sid}/ops", json={
            "op": "create", "params": {"name": "Cache"}, "revision": rev})
        assert r.status_code == 200
        body = r.json()
        assert body["revision"] == rev + 1
        names = [c["name"] for c in body["architecture"]["components"]]
        assert "Cache" in names

    def test_stale_revision_conflicts(self, client):
        sid, rev = new_session(client)
        assert client.post(f"/sessions/{sid}/ops", json={
            "op": "create", "params": {"name": "A"}, "revision": rev}).status_code == 200
        r = client.post(f"/sessions/{sid}/ops", json={
            "op": "create", "params": {"name": "B"}, "revision": rev})
        assert r.status_code == 409

    def test_malformed_operation_is_400(self, client):
        sid, rev = new_session(client)
        r = client.post(f"/sessions/{sid}/ops",
                        json={"op": "warpDrive", "revision": rev})
        assert r.status_code == 400

    def test_failing_operation_is_422_and_keeps_state(self, client):
        sid, rev = new_session(client)
        r = client.post(f"/sessions/{sid}/ops", json={
            "op": "create", "params": {"name": "Order"}, "revision": rev})
        assert r.status_code == 422
        body = client.get(f"/sessions/{sid}/architecture").json()
        assert body["revision"] == rev


class TestChecks:
    def test_base_check_ok(self, client):
        sid, _ = new_session(client)
        r = client.get(f"/sessions/{sid}/check")
        assert r.status_code == 200 and r.json()["ok"] is True

    def test_style_check_fails_on_eshop(self, client):
        sid, _ = new_session(client)
        r = client.get(f"/sessions/{sid}/check", params={"style": "client-server"})
        body = r.json()
        assert body["ok"] is False
        assert any(v["code"] == "node-count" for v in body["violations"])

    def test_unknown_style_404(self, client):
        sid, _ = new_session(client)
        assert client.get(f"/sessions/{sid}/check",
                          params={"style": "baroque"}).status_code == 404

    def test_catalogues(self, client):
        assert client.get("/styles").json() == {"styles": ["client-server"]}
        assert client.get("/patterns").json() == {"patterns": ["client-server"]}


class TestPatternFlow:
    def drive(self, client, script: DecisionScript):
        sid, _ = new_session(client)
        state = client.post(f"/sessions/{sid}/pattern/client-server/start").json()
        while state["state"] == "awaiting-decision":
            step = state["pendingDecision"]["step"]
            r = client.post(f"/sessions/{sid}/pattern/decision", json={
                "step": step, "answer": script.answer_for(step)})
            assert r.status_code == 200, r.text
            state = r.json()
        return sid, state

    def test_full_run_matches_headless_result(self, client):
        script = DecisionScript.load(FIXTURE_DIR / "eshop-decisions.json")
        sid, state = self.drive(client, script)
        assert state["state"] == "finished"
        assert state["finalReport"]["ok"] is True
        exported = client.get(f"/sessions/{sid}/architecture").json()["architecture"]
        got = Architecture.from_dict(exported).dumps()
        assert got == (FIXTURE_DIR / "eshop-cs.arch").read_text()
        headless = run_pattern(client_server_pattern(), fixtures.eshop(), script)
        assert got == headless.architecture.dumps()

    def test_invalid_answer_is_422_and_run_survives(self, client):
        sid, _ = new_session(client)
        state = client.post(f"/sessions/{sid}/pattern/client-server/start").json()
        assert state["pendingDecision"]["step"] == "names"
        r = client.post(f"/sessions/{sid}/pattern/decision", json={
            "step": "names", "answer": {"server": "Order", "clients": ["C"]}})
        assert r.status_code == 422
        state = client.get(f"/sessions/{sid}/pattern/state").json()
        assert state["state"] == "awaiting-decision"

    def test_duplicate_answer_is_409(self, client):
        sid, _ = new_session(client)
        client.post(f"/sessions/{sid}/pattern/client-server/start")
        good = {"server": "S", "clients": ["C"]}
        assert client.post(f"/sessions/{sid}/pattern/decision", json={
            "step": "names", "answer": good}).status_code == 200
        assert client.post(f"/sessions/{sid}/pattern/decision", json={
            "step": "names", "answer": good}).status_code == 409

    def test_answer_out_of_turn_is_409(self, client):
        sid, _ = new_session(client)
        client.post(f"/sessions/{sid}/pattern/client-server/start")
        r = client.post(f"/sessions/{sid}/pattern/decision",
                        json={"step": "assign", "answer": {}})
        assert r.status_code == 409

    def test_state_requires_started_run(self, client):
        sid, _ = new_session(client)
        assert client.get(f"/sessions/{sid}/pattern/state").status_code == 404

    def test_unknown_pattern_is_404(self, client):
        sid, _ = new_session(client)
        assert client.post(f"/sessions/{sid}/pattern/mystery/start").status_code == 404
