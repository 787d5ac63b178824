import pytest
from fastapi.testclient import TestClient

from app.main import app

S2 = {"d": 4, "h": [[1, 2], [3, 4]], "v": [[2, 3]]}


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_status(client):
    assert client.get("/").json()["status"] == "online"
    assert client.get("/health").json() == {"status": "healthy"}


def test_veech(client):
    response = client.post("/api/reports/veech", json=S2)
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "success"
    assert body["data"]["index"] == 6
    assert body["data"]["equals_gamma2"] is True


def test_invariants(client):
    response = client.post("/api/reports/invariants", json=S2)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["stratum"] == "H(1,1)"
    assert data["commutator"].count("(") == 2
    assert data["block_systems"] == [[[1, 4], [2, 3]]]


def test_cylinders(client):
    response = client.post("/api/reports/cylinders", json={"origami": S2, "direction": "0/1"})
    assert response.status_code == 200
    assert response.json()["data"]["count"] == 3


def test_bad_direction_is_unprocessable(client):
    response = client.post("/api/reports/cylinders", json={"origami": S2, "direction": "north"})
    assert response.status_code == 422


def test_disconnected_origami_is_unprocessable(client):
    response = client.post("/api/reports/invariants", json={"d": 2, "h": [], "v": []})
    assert response.status_code == 422
    assert "transitively" in response.json()["detail"]


def test_schema_validation(client):
    assert client.post("/api/reports/veech", json={"d": 0, "h": [], "v": []}).status_code == 422
    assert client.post("/api/reports/veech", json={"d": 3}).status_code == 422


def test_from_dessin_and_fingerprint(client):
    dessin = {"degree": 4, "g0": [[2, 3]], "g1": [[1, 2], [3, 4]]}
    response = client.post("/api/reports/from-dessin", json=dessin)
    assert response.status_code == 200
    origami = response.json()["data"]["origami"]
    assert origami["d"] == 16
    response = client.post("/api/reports/fingerprint", json=origami, params={"source_degree": 4})
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "success"
    assert body["data"]["dessin_check"]["passed"]


def test_fingerprint_lists_the_monodromy_group(client):
    response = client.post("/api/reports/fingerprint", json=S2)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["monodromy_group_order"] == 8
    assert data["ramification_profile"] == [2, 2]
    assert "dessin_check" not in data


def test_builtins(client):
    response = client.get("/api/reports/builtins")
    assert response.status_code == 200
    assert "L22" in response.json()["data"]["builtins"]


def test_verify_families(client):
    response = client.get("/api/reports/verify-families")
    assert response.status_code == 200
    assert response.json()["status"] == "success"


def test_verify_families_manifest(client):
    manifest = {
        "families": {"E": "x^3 - x"},
        "maps": {"id": {"P": "x", "R": "1"}},
        "identities": [{"source": "E", "map": "id", "target": "E"}],
    }
    response = client.post("/api/reports/verify-families", json=manifest)
    assert response.status_code == 200
    assert response.json()["data"]["source"] == "manifest"
    manifest["families"]["E"] = "x^^3"
    response = client.post("/api/reports/verify-families", json=manifest)
    assert response.status_code == 422
    assert "Family 'E'" in response.json()["detail"]
