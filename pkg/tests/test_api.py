from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from app import app, create_app
from config import settings


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def eq12_payload(instance_dir):
    return json.loads((instance_dir / "eq12.dmip").read_text())


def test_health(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_solve_delta(client, eq12_payload):
    resp = client.post("/api/solve", json={"instance": eq12_payload, "trace": True})
    assert resp.status_code == 200
    body = resp.json()
    assert body["state"] == "finished_opt"
    assert body["value"] == "1"
    assert body["incumbent"] == ["1/3", "2/3", "1", "0"]
    assert body["delta"] == {"delta": 3, "provenance": "UserSupplied"}
    assert body["trace"][-1] == "node 1 parent 0 action prune-opt value 1"


def test_solve_epsilon_and_baseline(client, eq12_payload):
    body = client.post("/api/solve", json={"instance": eq12_payload, "variant": "eps", "epsilon": "1/10"}).json()
    assert (body["state"], body["value"], body["nodes"]) == ("finished_nosol", None, 4)
    body = client.post("/api/solve", json={"instance": eq12_payload, "variant": "baseline"}).json()
    assert (body["state"], body["value"]) == ("finished_opt", "1")


def test_solve_rejects_bad_input(client, eq12_payload):
    resp = client.post("/api/solve", json={"instance": eq12_payload, "variant": "eps"})
    assert resp.status_code == 400
    broken = dict(eq12_payload, linking_rows=[])
    resp = client.post("/api/solve", json={"instance": broken})
    assert resp.status_code == 400
    assert "row" in resp.json()["detail"]
    resp = client.post("/api/solve", json={"instance": eq12_payload, "variant": "gomory"})
    assert resp.status_code == 422


def test_regularity(client):
    resp = client.post("/api/regularity", json={"rows": [[1, 1], [-1, 4]]})
    assert resp.json()["delta"] == 20
    assert resp.json()["provenance"] == "BruteForceMinimal"

    body = client.post("/api/regularity", json={"rows": [[1, 1], [-1, 4]], "method": "bounds"}).json()
    assert (body["lower"], body["detset"], body["hadamard"], body["nonsquare"]) == (4, 20, 60, None)

    assert client.post("/api/regularity", json={"rows": []}).status_code == 400
    assert client.post("/api/regularity", json={"rows": [[0, 0]], "method": "bounds"}).status_code == 400


def test_no_cross_origin_access_by_default(client):
    resp = client.get("/api/health", headers={"Origin": "http://localhost:5173"})
    assert resp.status_code == 200
    assert "access-control-allow-origin" not in resp.headers


def test_cross_origin_access_from_settings(monkeypatch):
    monkeypatch.setattr(settings, "cors_origins", ["http://example.test"])
    client = TestClient(create_app())
    resp = client.get("/api/health", headers={"Origin": "http://example.test"})
    assert resp.headers["access-control-allow-origin"] == "http://example.test"
    resp = client.get("/api/health", headers={"Origin": "http://other.test"})
    assert "access-control-allow-origin" not in resp.headers
