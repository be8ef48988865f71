"""HTTP service endpoints via the in-process test client."""

import pytest
from fastapi.testclient import TestClient

from iphase import __version__
from iphase.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": __version__}


def test_presets_listing(client):
    body = client.get("/presets").json()
    assert body["presets"] == ["gravimeter", "clock", "recoil", "gyroscope"]
    assert len(body["tables"]) == 5
    assert "gravimeter_freefall" in body["tables"]


def test_catalog_rows(client):
    body = client.get("/catalog").json()
    assert body["schema_version"] == 1
    assert len(body["rows"]) == 36
    first = body["rows"][0]
    assert first["id"] == "grav.1"
    assert first["factors"] == "k_z T^2 g_z"


def test_run_all_modes(client):
    response = client.post("/run", json={"preset": "gravimeter", "modes": "all"})
    assert response.status_code == 200
    body = response.json()
    assert len(body["results"]) == 3
    pairs = {(r["trajectory_mode"], r["action_mode"]) for r in body["results"]}
    assert pairs == {
        ("full", "full"),
        ("no_gradient", "full"),
        ("free_fall", "full"),
    }
    full = next(r for r in body["results"] if r["trajectory_mode"] == "full")
    assert full["observable_rad"] == pytest.approx(-23082576.788779512)


def test_run_unknown_preset_404(client):
    response = client.post("/run", json={"preset": "bogus"})
    assert response.status_code == 404
    assert "unknown preset" in response.json()["detail"]


def test_run_bad_modes_422(client):
    response = client.post("/run", json={"preset": "gravimeter", "modes": "junk"})
    assert response.status_code == 422
    assert "unknown dynamics mode" in response.json()["detail"]


def test_run_mode_ordering_422(client):
    response = client.post(
        "/run", json={"preset": "gravimeter", "modes": "full:free_fall"}
    )
    assert response.status_code == 422
    assert "poorer than" in response.json()["detail"]


def test_run_missing_preset_422(client):
    response = client.post("/run", json={"modes": "full"})
    assert response.status_code == 422


def test_run_parameter_override(client):
    base = client.post("/run", json={"preset": "gravimeter"}).json()
    short = client.post(
        "/run", json={"preset": "gravimeter", "parameters": {"T": 0.2}}
    ).json()
    assert short["parameters"]["T"] == 0.2
    ratio = (
        short["results"][0]["observable_rad"] / base["results"][0]["observable_rad"]
    )
    assert ratio == pytest.approx(0.25, rel=1e-3)


def test_run_environment_override(client):
    base = client.post("/run", json={"preset": "gravimeter"}).json()
    light = client.post(
        "/run",
        json={"preset": "gravimeter", "environment": {"g_z": -9.7}},
    ).json()
    assert (
        light["results"][0]["observable_rad"] != base["results"][0]["observable_rad"]
    )
    ratio = (
        light["results"][0]["observable_rad"] / base["results"][0]["observable_rad"]
    )
    assert ratio == pytest.approx(9.7 / 9.8, rel=1e-3)


def test_tables_single(client):
    response = client.post("/tables", json={"tables": ["gyroscope"]})
    assert response.status_code == 200
    body = response.json()
    assert body["all_ok"] is True
    assert len(body["reports"]) == 1
    assert body["reports"][0]["table"] == "gyroscope"
    assert len(body["reports"][0]["rows"]) == 5


def test_tables_default_runs_all_five(client):
    body = client.post("/tables", json={}).json()
    assert [r["table"] for r in body["reports"]] == [
        "gravimeter",
        "clock",
        "recoil",
        "gyroscope",
        "gravimeter_freefall",
    ]
    assert body["all_ok"] is True


def test_tables_unknown_tag_404(client):
    response = client.post("/tables", json={"tables": ["barometer"]})
    assert response.status_code == 404
    assert "unknown table" in response.json()["detail"]


def test_tables_bad_tolerance_422(client):
    response = client.post(
        "/tables", json={"tables": ["gyroscope"], "tolerance": "casual"}
    )
    assert response.status_code == 422
    assert "unknown tolerance" in response.json()["detail"]


def test_compare_default_target(client):
    response = client.post("/compare", json={"preset": "gyroscope"})
    assert response.status_code == 200
    body = response.json()
    assert body["met"] is True
    assert body["target_rad"] == 1e-9
    assert abs(body["ng_minus_full_rad"]) <= 1e-9


def test_compare_tight_target_missed(client):
    body = client.post(
        "/compare", json={"preset": "gravimeter", "target": 1e-12}
    ).json()
    assert body["met"] is False


def test_sweep_rows(client):
    response = client.post(
        "/sweep",
        json={
            "preset": "gravimeter",
            "axes": [{"parameter": "T", "start": 0.1, "stop": 0.3, "count": 5}],
            "nodes": 8,
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert len(body["rows"]) == 5
    assert body["axes"] == ["T"]
    assert body["rows"][0]["values"]["T"] == 0.1


def test_sweep_needs_single_mode_pair(client):
    response = client.post(
        "/sweep",
        json={
            "preset": "gravimeter",
            "axes": [{"parameter": "T", "start": 0.1, "stop": 0.3, "count": 3}],
            "modes": "all",
        },
    )
    assert response.status_code == 422
    assert "exactly one" in response.json()["detail"]


def test_sweep_empty_axis_422(client):
    response = client.post(
        "/sweep",
        json={
            "preset": "gravimeter",
            "axes": [{"parameter": "T", "start": 0.1, "stop": 0.3, "count": 0}],
        },
    )
    assert response.status_code == 422
    assert "empty range" in response.json()["detail"]
