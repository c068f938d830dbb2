import json

import pytest
from fastapi.testclient import TestClient

from main import app
from routers.artifacts import get_output_root


@pytest.fixture
def client(tmp_path):
    run = tmp_path / "fig4" / "beta10"
    (run / "grids").mkdir(parents=True)
    (run / "svg").mkdir()
    manifest = {"name": "beta10", "config_sha256": "abc", "seeds": {"global": 0}, "entries": []}
    (run / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    (run / "grids" / "pca__L_total__0.json").write_text('{"field": []}', encoding="utf-8")
    (run / "grids" / "pca__L_total__0.csv").write_text("x,y,value\n", encoding="utf-8")
    (run / "svg" / "pca__L_total__0.svg").write_text("<svg/>", encoding="utf-8")
    (tmp_path / "secret.txt").write_text("nope", encoding="utf-8")
    app.dependency_overrides[get_output_root] = lambda: tmp_path
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_health(client):
    assert client.get("/api/health").json() == {"status": "healthy"}


def test_list_runs(client):
    assert client.get("/api/runs").json() == ["fig4/beta10"]


def test_manifest(client):
    response = client.get("/api/runs/fig4/beta10/manifest")
    assert response.status_code == 200
    assert response.json()["config_sha256"] == "abc"


def test_grids(client):
    assert client.get("/api/runs/fig4/beta10/grids").json() == ["pca__L_total__0.csv", "pca__L_total__0.json"]
    response = client.get("/api/runs/fig4/beta10/grids/pca__L_total__0.json")
    assert response.status_code == 200
    assert response.json() == {"field": []}
    response = client.get("/api/runs/fig4/beta10/grids/pca__L_total__0.csv")
    assert response.headers["content-type"].startswith("text/csv")


def test_svg(client):
    response = client.get("/api/runs/fig4/beta10/svg/pca__L_total__0.svg")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")


def test_missing_artifacts_are_404(client):
    assert client.get("/api/runs/fig4/beta30/manifest").status_code == 404
    assert client.get("/api/runs/fig4/beta10/fidelity").status_code == 404
    assert client.get("/api/runs/fig4/beta10/svg/missing.svg").status_code == 404
    assert client.get("/api/runs/fig4/beta10/grids/..%2F..%2F..%2Fsecret.txt").status_code == 404
