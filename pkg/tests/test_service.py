"""Engine HTTP endpoints (run/batch/eval/health) via the FastAPI app."""

import pytest
from fastapi.testclient import TestClient

from cmsg import __version__
from cmsg.pipeline import PipelineConfig
from cmsg.service.app import create_app


@pytest.fixture(scope="module")
def http():
    with TestClient(create_app()) as client:
        yield client


class TestEngineEndpoints:
    def test_health(self, http):
        body = http.get("/v1/health").json()
        assert body["status"] == "ok"
        assert body["engine_version"] == __version__

    def test_run_fixture_image(self, http):
        response = http.post("/v1/run", json={"image_id": "banana-tree"})
        assert response.status_code == 200
        record = response.json()
        assert record["status"] == "ok"
        assert record["first_sentence"].startswith("a bunch of beautiful")
        assert 12 <= len(record["candidates"]) <= 40

    def test_run_with_config_overrides(self, http):
        response = http.post("/v1/run", json={
            "image_id": "banana-tree",
            "config": {"use_consequence": False},
        })
        assert response.status_code == 200
        assert response.json()["consequences"] == []

    def test_run_unknown_image_404_with_error_body(self, http):
        response = http.post("/v1/run", json={"image_id": "ghost"})
        assert response.status_code == 404
        body = response.json()
        assert body["error"]["code"] == "backend_error"

    def test_run_requires_an_image(self, http):
        response = http.post("/v1/run", json={})
        assert response.status_code == 422
        assert "error" in response.json()

    def test_run_rejects_bad_base64(self, http):
        response = http.post("/v1/run", json={"image_b64": "!!!not-base64!!!"})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_input"

    def test_batch_keeps_order_and_isolates_failures(self, http):
        response = http.post("/v1/batch", json={
            "entries": ["banana-tree", "ghost", "quiet-lake"],
        })
        assert response.status_code == 200
        records = response.json()["records"]
        assert [r["image_id"] for r in records] == ["banana-tree", "ghost", "quiet-lake"]
        assert [r["status"] for r in records] == ["ok", "failed", "ok"]

    def test_eval_round_trip(self, http):
        batch = http.post("/v1/batch", json={"entries": ["banana-tree",
                                                         "surfer-wave"]}).json()
        response = http.post("/v1/eval", json={"records": batch["records"]})
        assert response.status_code == 200
        report = response.json()
        assert report["n_images"] == 2
        assert report["tl_mean"] > 0

    def test_invalid_config_override_rejected(self, http):
        response = http.post("/v1/run", json={
            "image_id": "banana-tree",
            "config": {"tau": 9},
        })
        assert response.status_code in (400, 422)
        assert "error" in response.json()


class TestModelEndpointsServeConfiguredBackend:
    def test_run_uses_same_fake_as_model_endpoints(self, http):
        tags = http.post("/v1/tags", json={"image_id": "banana-tree"}).json()["tags"]
        record = http.post("/v1/run", json={"image_id": "banana-tree"}).json()
        assert sorted(t["label"] for t in tags) == sorted(
            label for label, _ in record["tags"])
