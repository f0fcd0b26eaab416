# test_avoid_web.py
import json

import pytest

import avoid_web


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path))
    run = tmp_path / "case1_dav2"
    run.mkdir()
    (run / "metrics.json").write_text(json.dumps({
        "collision": False, "aborted": False, "completed": True, "min_clearance": 1.31,
        "max_lateral_error": 0.08, "phase_sequence": ["Straight", "AvoidLeft", "Straight"],
    }))
    (run / "scenario.json").write_text(json.dumps({"name": "case1", "depth_model": "dav2", "seed": 0}))
    (run / "steering.svg").write_text("<svg xmlns='http://www.w3.org/2000/svg'></svg>")
    (tmp_path / "sweep.csv").write_text(
        "case,model,seed,collision,min_clearance,max_lateral_error,completed,aborted,phases,five_stage\n"
        "1,dav2,0,False,1.3,0.1,True,False,Straight-AvoidLeft-Straight,True\n"
        "1,dav2,1,True,-0.1,0.1,False,False,Straight,False\n")
    avoid_web.app.config["TESTING"] = True
    with avoid_web.app.test_client() as c:
        yield c


def test_status(client):
    doc = client.get("/api/status").get_json()
    assert doc["status"] == "ok"
    assert doc["runs"] == 1 and doc["clean"] == 1
    assert doc["sweep"] == [{"case": 1, "model": "dav2", "ok": 1, "runs": 2, "pct": 50.0}]


def test_runs_listing(client):
    runs = client.get("/api/runs").get_json()["runs"]
    assert runs[0]["path"] == "case1_dav2"
    assert runs[0]["ok"] is True
    assert runs[0]["has_plot"] is True


def test_index_page(client):
    resp = client.get("/")
    assert resp.status_code == 200
    assert b"case1_dav2" in resp.data
    assert b"1/2 clean" in resp.data


def test_plot_route(client):
    resp = client.get("/runs/case1_dav2/steering.svg")
    assert resp.status_code == 200
    assert resp.mimetype == "image/svg+xml"


def test_plot_route_stays_inside_output(client):
    assert client.get("/runs/../steering.svg").status_code == 404
    assert client.get("/runs/missing/steering.svg").status_code == 404


def test_empty_output(tmp_path, monkeypatch):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "nothing"))
    with avoid_web.app.test_client() as c:
        assert c.get("/api/runs").get_json() == {"message": "no runs yet", "runs": []}
