import time

import pytest
from fastapi.testclient import TestClient

import esskit
from esskit import runs
from esskit.service import REPLICATION_CAP, create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


TABLE_ROW_DOCS = {
    "normal": {"measure": "mean-diff", "ratio": "2:1", "s1sq": 1.0, "s0sq": 1.0, "s": 0.5},
    "rd": {"measure": "rd", "ratio": "2:1", "mu0": -1.0, "m0": 1.0, "rho": -0.8,
           "theta0": 0.3, "s": 0.1},
    "log-or": {"measure": "log-or", "ratio": "2:1", "mu0": -1.0, "m0": 0.5, "rho": -0.8,
               "theta0": 0.4, "s": 0.5},
}


class TestHealth:
    def test_ok_with_version_and_latency(self, client):
        start = time.perf_counter()
        resp = client.get("/v1/health")
        elapsed = time.perf_counter() - start
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["engine_version"] == esskit.__version__
        assert elapsed < 0.05


class TestEssEndpoint:
    def test_normal_reference(self, client):
        resp = client.post("/v1/ess", json=TABLE_ROW_DOCS["normal"])
        assert resp.status_code == 200
        body = resp.json()
        assert body["ess_total"] == 18.0
        assert body["warnings"] == []
        assert body["engine_version"] == esskit.__version__

    def test_log_odds_reference(self, client):
        doc = dict(TABLE_ROW_DOCS["log-or"], theta0=0.0, s=1.0)
        resp = client.post("/v1/ess", json=doc)
        assert resp.json()["ess_total"] == pytest.approx(25.29, abs=0.05)

    def test_invalid_rho_is_400(self, client):
        resp = client.post("/v1/ess", json=dict(TABLE_ROW_DOCS["rd"], rho=1.5))
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "VALIDATION"
        assert "rho" in body["message"]

    def test_missing_field_is_400(self, client):
        doc = {k: v for k, v in TABLE_ROW_DOCS["rd"].items() if k != "s"}
        assert client.post("/v1/ess", json=doc).status_code == 400

    def test_non_object_body_is_400(self, client):
        assert client.post("/v1/ess", json=[1, 2, 3]).status_code == 400


class TestOtherEndpoints:
    def test_fit_reference(self, client):
        resp = client.post("/v1/fit", json={
            "measure": "rd", "y0": 20, "n0": 100, "y1": 70, "n1": 200})
        assert resp.status_code == 200
        assert resp.json()["rho_hat"] == pytest.approx(-0.765, abs=1e-3)

    def test_fit_boundary_is_422(self, client):
        resp = client.post("/v1/fit", json={
            "measure": "rd", "y0": 0, "n0": 100, "y1": 70, "n1": 200})
        assert resp.status_code == 422
        assert resp.json()["code"] == "BOUNDARY_COUNTS"

    def test_posterior_normal_reference(self, client):
        resp = client.post("/v1/posterior", json={
            "measure": "mean-diff", "ratio": "2:1", "s1sq": 1.0, "s0sq": 1.0,
            "s": 0.5, "sigma_sq": 0.015})
        assert resp.status_code == 200
        assert resp.json()["ess"]["ess_total"] == pytest.approx(318.0, abs=1e-9)

    def test_density_grid_rows(self, client):
        resp = client.post("/v1/density-grid", json={
            "measure": "rd", "mu0": -1.0, "m0": 1.0, "rho": -0.8,
            "theta0": 0.3, "s": 0.1, "resolution": 8})
        assert resp.status_code == 200
        assert len(resp.json()["rows"]) == 64

    def test_density_grid_zero_resolution_is_400(self, client):
        resp = client.post("/v1/density-grid", json={
            "measure": "rd", "mu0": -1.0, "m0": 1.0, "rho": -0.8,
            "theta0": 0.3, "s": 0.1, "resolution": 0})
        assert resp.status_code == 400

    def test_consistency_small_run(self, client):
        resp = client.post("/v1/consistency", json={
            "measure": "rd", "ratio": "2:1", "mu0": -1.0, "m0": 1.0, "rho": -0.8,
            "theta0": 0.4, "s": 0.1, "true_p0": 0.4, "true_p1": 0.65,
            "n1": 60, "n0": 30, "reps": 8, "seed": 42,
            "quad_nodes": 100, "quad_panels": 3, "verbose": True})
        assert resp.status_code == 200
        assert len(resp.json()["per_replicate"]) == 8

    def test_consistency_replication_cap(self, client):
        resp = client.post("/v1/consistency", json={
            "measure": "rd", "ratio": "2:1", "mu0": -1.0, "m0": 1.0, "rho": -0.8,
            "theta0": 0.4, "s": 0.1, "true_p0": 0.4, "true_p1": 0.65,
            "n1": 60, "n0": 30, "reps": REPLICATION_CAP + 1, "seed": 42})
        assert resp.status_code == 422
        assert resp.json()["code"] == "REPLICATION_CAP"


class TestParityAndStatelessness:
    @pytest.mark.parametrize("name", sorted(TABLE_ROW_DOCS))
    def test_service_matches_run_layer(self, client, name):
        doc = TABLE_ROW_DOCS[name]
        direct = runs.run_ess(doc)
        body = client.post("/v1/ess", json=doc).json()
        for key, value in direct.items():
            assert body[key] == (list(value) if isinstance(value, tuple) else value)

    def test_identical_requests_identical_bodies(self, client):
        doc = TABLE_ROW_DOCS["rd"]
        first = client.post("/v1/ess", json=doc)
        second = client.post("/v1/ess", json=doc)
        assert first.content == second.content
