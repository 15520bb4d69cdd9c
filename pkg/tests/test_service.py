"""HTTP reward service endpoints and their library equivalence."""

import random

import pytest
from fastapi.testclient import TestClient

from redtrace import (
    Embedder,
    EmbedderConfig,
    PenaltyConfig,
    make_trace,
    normalize_answer,
    score_response,
)
from redtrace.service import create_app
from redtrace.types import round6


@pytest.fixture()
def client():
    app = create_app(penalty=PenaltyConfig(), embedder=EmbedderConfig())
    with TestClient(app) as c:
        yield c


def item(i, correct=True, n_steps=3):
    answer = 20 + i
    final = answer if correct else answer + 1
    steps = " ".join(f"step {j} of the derivation." for j in range(n_steps))
    return {
        "id": f"item-{i}",
        "text": f"{steps} So the result is {final}. Double-check {final}.",
        "ground_truth": str(answer),
    }


class TestScoreEndpoint:
    def test_clean_correct_item_scores_one(self, client):
        body = {
            "items": [
                {"id": "a", "text": "The answer is 42", "ground_truth": "42"}
            ]
        }
        resp = client.post("/v1/score", json=body)
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["errors"] == []
        [result] = payload["results"]
        assert result["reward"] == 1.0
        assert result["correct"] is True
        assert result["ird"] == 0.0 and result["erd"] == 0.0
        assert result["fcs_sentence_index"] == 0

    def test_incorrect_item_zero_reward_with_diagnostics(self, client):
        resp = client.post("/v1/score", json={"items": [item(0, correct=False)]})
        assert resp.status_code == 200
        [result] = resp.json()["results"]
        assert result["reward"] == 0.0
        assert result["correct"] is False
        assert "ird" in result and "erd" in result and "p_int" in result

    def test_mixed_batch_isolates_malformed_item(self, client):
        items = [item(0), {"id": "bad", "text": "   ", "ground_truth": "5"}, item(2)]
        resp = client.post("/v1/score", json={"items": items})
        assert resp.status_code == 200
        payload = resp.json()
        assert [r["id"] for r in payload["results"]] == ["item-0", "item-2"]
        assert [e["id"] for e in payload["errors"]] == ["bad"]

    def test_malformed_body_is_400(self, client):
        resp = client.post("/v1/score", json={"wrong": True})
        assert resp.status_code == 400
        resp = client.post("/v1/score", json={"items": [{"id": "x"}]})
        assert resp.status_code == 400

    def test_empty_batch_is_400(self, client):
        assert client.post("/v1/score", json={"items": []}).status_code == 400

    def test_oversize_batch_is_413(self):
        app = create_app(max_batch_size=2)
        with TestClient(app) as client:
            items = [item(i) for i in range(3)]
            assert client.post("/v1/score", json={"items": items}).status_code == 413

    def test_config_override_applies_per_request(self, client):
        erd_item = item(0, correct=True)
        with_penalty = client.post("/v1/score", json={"items": [erd_item]}).json()
        without = client.post(
            "/v1/score",
            json={"items": [erd_item], "config_override": {"enable_external": False}},
        ).json()
        assert without["results"][0]["p_ext"] == 1.0
        assert with_penalty["results"][0]["p_ext"] < 1.0
        # the override does not stick
        after = client.post("/v1/score", json={"items": [erd_item]}).json()
        assert after["results"][0]["p_ext"] == with_penalty["results"][0]["p_ext"]

    def test_invalid_override_is_400(self, client):
        resp = client.post(
            "/v1/score",
            json={"items": [item(0)], "config_override": {"alpha": 0.01}},
        )
        assert resp.status_code == 400

    def test_backend_exhaustion_is_502(self):
        config = EmbedderConfig(
            backend="remote",
            endpoint_url="http://127.0.0.1:9/unreachable",
            max_retries=0,
        )
        app = create_app(embedder=config)
        with TestClient(app) as client:
            resp = client.post("/v1/score", json={"items": [item(0)]})
            assert resp.status_code == 502
            health = client.get("/v1/health").json()
            assert health["status"] == "degraded"


class TestHealthEndpoint:
    def test_fresh_service(self, client):
        payload = client.get("/v1/health").json()
        assert payload["status"] == "ok"
        assert payload["cache_entries"] == 0
        assert payload["backend"].startswith("local:")

    def test_cache_grows_after_scoring(self, client):
        client.post("/v1/score", json={"items": [item(0)]})
        payload = client.get("/v1/health").json()
        assert payload["cache_entries"] > 0


class TestConfigEndpoint:
    def test_get_defaults(self, client):
        payload = client.get("/v1/config").json()
        assert payload == PenaltyConfig().to_dict()

    def test_update_applies_to_subsequent_scores(self, client):
        resp = client.post("/v1/config", json={"enable_internal": False})
        assert resp.status_code == 200
        assert resp.json()["enable_internal"] is False
        result = client.post("/v1/score", json={"items": [item(0)]}).json()
        assert result["results"][0]["p_int"] == 1.0

    def test_invariant_violation_is_422(self, client):
        resp = client.post("/v1/config", json={"beta": 0.2, "alpha": 0.1})
        assert resp.status_code == 422
        # config unchanged
        assert client.get("/v1/config").json() == PenaltyConfig().to_dict()

    def test_unknown_key_is_422(self, client):
        assert client.post("/v1/config", json={"zeta": 1}).status_code == 422


class TestAuthToken:
    def test_token_required_when_configured(self):
        app = create_app(auth_token="sesame")
        with TestClient(app) as client:
            assert client.get("/v1/health").status_code == 401
            ok = client.get("/v1/health", headers={"X-Auth-Token": "sesame"})
            assert ok.status_code == 200


class TestLibraryEquivalence:
    def test_service_matches_direct_calls(self):
        rng = random.Random(11)
        items = []
        for i in range(20):
            correct = rng.random() < 0.7
            items.append(item(i, correct=correct, n_steps=rng.randint(1, 6)))

        app = create_app(penalty=PenaltyConfig(), embedder=EmbedderConfig())
        with TestClient(app) as client:
            served = client.post("/v1/score", json={"items": items}).json()["results"]

        embedder = Embedder(EmbedderConfig())
        for sent, raw in zip(served, items):
            trace = make_trace(raw["id"], raw["text"])
            direct = score_response(
                trace, normalize_answer(raw["ground_truth"]), PenaltyConfig(), embedder
            )
            assert sent["id"] == direct.trace_id
            assert sent["correct"] == direct.correct
            assert sent["ird"] == round6(direct.ird)
            assert sent["erd"] == round6(direct.erd)
            assert sent["p_int"] == round6(direct.p_int)
            assert sent["p_ext"] == round6(direct.p_ext)
            assert sent["reward"] == round6(direct.reward)

    def test_idempotent_reposts(self, client):
        items = [item(i) for i in range(5)]
        first = client.post("/v1/score", json={"items": items}).json()
        second = client.post("/v1/score", json={"items": items}).json()
        assert first == second
