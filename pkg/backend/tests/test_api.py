import numpy as np
import pytest
from fastapi.testclient import TestClient
from numpy.testing import assert_allclose

from core.linalg import DensityMatrix
from main import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        response = client.get("/api/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy"}


class TestDiscordEndpoint:
    def test_bell_state(self, client):
        response = client.post("/api/discord", json={"matrix": DensityMatrix.werner(1.0).to_payload()})
        assert response.status_code == 200
        body = response.json()
        assert_allclose([body["total"], body["classical"], body["discord"]], [2.0, 1.0, 1.0], atol=1e-6)
        assert body["brute_force"] is None

    def test_brute_force(self, client):
        payload = {"matrix": DensityMatrix.werner(0.5).to_payload(), "brute_force": True, "resolution": 30}
        body = client.post("/api/discord", json=payload).json()
        assert_allclose(body["brute_force"], body["discord"], atol=1e-3)

    def test_non_x_state(self, client):
        m = np.eye(4) / 4
        m[0, 1] = m[1, 0] = 0.05
        response = client.post("/api/discord", json={"matrix": {"re": m.tolist()}})
        assert response.status_code == 400

    def test_invalid_trace(self, client):
        response = client.post("/api/discord", json={"matrix": {"re": np.eye(4).tolist()}})
        assert response.status_code == 400

    def test_malformed_payload(self, client):
        response = client.post("/api/discord", json={"matrix": {"im": [[0.0]]}})
        assert response.status_code == 422


class TestStationaryEndpoint:
    def test_f2_bell_input(self, client):
        response = client.get("/api/stationary", params={"mu": 1.0, "a": 1.0})
        assert response.status_code == 200
        body = response.json()
        assert body["null_space_dimension"] == 2
        assert_allclose(body["correlations"]["discord"], 0.38, atol=0.01)

    def test_f1_bell_input(self, client):
        body = client.get("/api/stationary", params={"mu": -1.0, "a": 1.0, "xi": 0.5}).json()
        assert_allclose(np.array(body["state"]["re"])[3, 3], 1.0, atol=1e-6)
        assert body["xi"] == 0.5

    def test_mu_out_of_range(self, client):
        assert client.get("/api/stationary", params={"mu": 2.0}).status_code == 422


class TestAnalyticEndpoint:
    def test_f2(self, client):
        body = client.get("/api/analytic/f2", params={"a": 1.0}).json()
        assert body["scheme"] == "F2"
        assert_allclose(body["numeric"]["discord"], 0.38, atol=0.01)
        assert_allclose(body["closed_form"]["total"], body["numeric"]["total"], atol=1e-6)

    def test_f1(self, client):
        body = client.get("/api/analytic/f1", params={"a": 0.0}).json()
        assert body["xi"] is None
        assert_allclose(body["numeric"]["discord"], 0.216, atol=0.01)

    def test_unknown_scheme(self, client):
        assert client.get("/api/analytic/f3").status_code == 422
