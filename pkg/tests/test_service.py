"""HTTP service contract: endpoints, status codes, error bodies."""

import json

import pytest
from fastapi.testclient import TestClient

from datavalor import packaged_scenario, run_valuation, scenario_to_dict
from datavalor.service import create_app

FLOW = ["No", "Yes", "No", "No", "Yes", "No", "Direct", "Yes", "No", "No"]


@pytest.fixture()
def client(tmp_path):
    app = create_app(store_dir=str(tmp_path / "store"))
    with TestClient(app) as tc:
        yield tc


def walk(client, session_id, labels):
    doc = client.get(f"/sessions/{session_id}").json()
    for label in labels:
        assert doc["question"] is not None
        response = client.post(f"/sessions/{session_id}/answers",
                               json={"question_id": doc["question"]["id"],
                                     "answer": label})
        assert response.status_code == 200
        doc = response.json()
    return doc


def put_example(client, name):
    doc = scenario_to_dict(packaged_scenario(name))
    response = client.post("/scenarios", json=doc)
    assert response.status_code == 201
    return response.json()["id"]


# ---------------------------------------------------------------- screening


def test_screening_wizard_flow(client):
    response = client.post("/sessions/screening", json={"tree": "step1"})
    assert response.status_code == 201
    session_id = response.json()["session_id"]
    assert response.json()["status"] == "in_progress"

    doc = walk(client, session_id, FLOW)
    assert doc["status"] == "complete"
    assert doc["question"] is None
    assert doc["accumulated_codes"] == [2, 3, 6, 12, 13]

    recs = client.get(f"/sessions/{session_id}/recommendations")
    assert recs.status_code == 200
    body = recs.json()
    assert body["effects"]["main_driver"] == "relevance"
    assert body["effects"]["strategy"] == "daas"
    assert body["accumulated_codes"] == [2, 3, 6, 12, 13]
    assert body["discrepancy_notes"]


def test_screening_state_parity(client):
    # state fetched later equals the state returned by the last answer
    session_id = client.post("/sessions/screening", json={}).json()["session_id"]
    after_posts = walk(client, session_id, FLOW[:4])
    fetched = client.get(f"/sessions/{session_id}").json()
    assert fetched == after_posts


def test_screening_step2_purpose(client):
    response = client.post("/sessions/screening", json={"tree": "step2"})
    session_id = response.json()["session_id"]
    walk(client, session_id, ["No", "Yes", "Yes", "No", "No", "Yes", "No"])
    body = client.get(f"/sessions/{session_id}/recommendations").json()
    assert body["purpose"] == "operational"


def test_screening_inline_tree(client):
    tree = {
        "id": "mini", "stage": "step_i", "entry_question_id": "q1",
        "questions": [{"id": "q1", "text": "Keep it?",
                       "answers": [{"label": "Yes", "codes": [1], "next": None},
                                   {"label": "No", "codes": [], "next": None}]}],
        "code_recommendations": {"1": {"text": "keep", "effects": {}}},
    }
    response = client.post("/sessions/screening", json={"tree": tree})
    assert response.status_code == 201
    session_id = response.json()["session_id"]
    doc = walk(client, session_id, ["Yes"])
    assert doc["accumulated_codes"] == [1]


def test_screening_errors(client):
    assert client.post("/sessions/screening",
                       json={"tree": "step9"}).status_code == 400

    missing = client.get("/sessions/nope")
    assert missing.status_code == 404
    body = missing.json()
    assert body["code"] == "not_found" and "nope" in body["message"]

    session_id = client.post("/sessions/screening", json={}).json()["session_id"]
    out_of_order = client.post(f"/sessions/{session_id}/answers",
                               json={"question_id": "wrong", "answer": "Yes"})
    assert out_of_order.status_code == 409
    assert out_of_order.json()["code"] == "out_of_order"

    question = client.get(f"/sessions/{session_id}/question").json()
    bad_label = client.post(f"/sessions/{session_id}/answers",
                            json={"question_id": question["question"]["id"],
                                  "answer": "Perhaps"})
    assert bad_label.status_code == 400

    unfinished = client.get(f"/sessions/{session_id}/recommendations")
    assert unfinished.status_code == 400


def test_request_validation_maps_to_400(client):
    response = client.post("/sessions/screening",
                           content=b"[1, 2]",
                           headers={"content-type": "application/json"})
    assert response.status_code == 400
    body = response.json()
    assert body["code"] == "validation_error"
    assert set(body) == {"code", "message", "path"}


# ------------------------------------------------------------------ catalog


def test_catalog_endpoint(client):
    everything = client.get("/catalog").json()
    assert everything["version"] == "1"
    assert len(everything["metrics"]) >= 20

    filtered = client.get("/catalog", params={"perspective": "Financial",
                                              "keyword": "return"}).json()
    assert [m["id"] for m in filtered["metrics"]] == ["roi"]

    assert client.get("/catalog",
                      params={"perspective": "Imaginary"}).status_code == 400


# ---------------------------------------------------------------------- anp


def test_anp_priorities(client):
    response = client.post("/anp/priorities",
                           json={"items": ["a", "b"],
                                 "matrix": [[1.0, 4.0], [0.25, 1.0]]})
    assert response.status_code == 200
    body = response.json()
    assert body["weights"] == pytest.approx([0.8, 0.2])
    assert body["consistency"]["consistency_ratio"] == pytest.approx(0.0)

    geometric = client.post("/anp/priorities",
                            json={"items": ["a", "b"],
                                  "matrix": [[1.0, 4.0], [0.25, 1.0]],
                                  "method": "geometric_mean"})
    assert geometric.json()["weights"] == pytest.approx([0.8, 0.2])

    assert client.post("/anp/priorities",
                       json={"items": ["a"], "matrix": [[1.0]],
                             "method": "sorcery"}).status_code == 400


def test_anp_consistency(client):
    cyclic = [[1.0, 9.0, 1.0 / 9.0],
              [1.0 / 9.0, 1.0, 9.0],
              [9.0, 1.0 / 9.0, 1.0]]
    body = client.post("/anp/consistency",
                       json={"items": ["a", "b", "c"],
                             "matrix": cyclic}).json()
    assert body["consistency_ratio"] > 0.10
    assert body["acceptable"] is False

    bad = client.post("/anp/consistency", json={"items": ["a", "b"]})
    assert bad.status_code == 400
    assert "items" in bad.json()["message"] or "matrix" in bad.json()["message"]


# ---------------------------------------------------------------- scenarios


def test_scenario_crud(client):
    assert client.get("/scenarios").json() == {"scenarios": []}

    put_example(client, "example1")
    assert client.get("/scenarios").json() == {"scenarios": ["greenroute-traffic"]}

    doc = client.get("/scenarios/greenroute-traffic").json()
    assert doc == scenario_to_dict(packaged_scenario("example1"))

    doc["description"] = "greenroute, revised"
    response = client.put("/scenarios/greenroute-traffic", json=doc)
    assert response.status_code == 200
    assert client.get("/scenarios/greenroute-traffic").json()["description"] == \
        "greenroute, revised"

    mismatch = client.put("/scenarios/other-id", json=doc)
    assert mismatch.status_code == 400
    assert mismatch.json()["path"] == "/id"

    assert client.get("/scenarios/missing").status_code == 404


def test_scenario_create_rejects_bad_documents(client):
    doc = scenario_to_dict(packaged_scenario("example1"))
    doc["schema"] = "datavalor/9"
    response = client.post("/scenarios", json=doc)
    assert response.status_code == 400
    assert response.json()["path"] == "/schema"


def test_valuation_endpoint_matches_library(client):
    put_example(client, "example1")
    response = client.post("/scenarios/greenroute-traffic/valuations",
                           params={"candidate": "greenroute"})
    assert response.status_code == 200
    body = response.json()
    expected = run_valuation(packaged_scenario("example1"), "greenroute")
    assert body["value"] == pytest.approx(expected.value)
    assert body["audit"]["qru"] == pytest.approx(expected.audit["qru"])

    missing = client.post("/scenarios/greenroute-traffic/valuations",
                          params={"candidate": "bluebus"})
    assert missing.status_code == 404


def test_valuation_compat_query(client):
    put_example(client, "example2")
    carried = client.post("/scenarios/fleet-telemetry/valuations",
                          params={"candidate": "d2"}).json()
    computed = client.post("/scenarios/fleet-telemetry/valuations",
                           params={"candidate": "d2",
                                   "paper_compat": "false"}).json()
    assert carried["qru"] == pytest.approx(0.2731, abs=1e-4)
    assert computed["qru"] == pytest.approx(0.2726594, abs=1e-6)


def test_valuation_math_error_is_422(client):
    doc = scenario_to_dict(packaged_scenario("example1"))
    doc["candidates"][0]["temporal"] = {
        "mode": "processing_ratio",
        "t_p": {"value": 15.0, "unit": "day"},
        "t_a": {"value": 0.0, "unit": "day"}}
    assert client.post("/scenarios", json=doc).status_code == 201
    response = client.post("/scenarios/greenroute-traffic/valuations",
                           params={"candidate": "greenroute"})
    assert response.status_code == 422
    assert response.json()["code"] == "math_error"


def test_comparison_endpoint(client):
    put_example(client, "example2")
    body = client.post("/scenarios/fleet-telemetry/comparison").json()
    assert body["winner"] == "d3"
    assert [r["candidate_id"] for r in body["ranked"]] == [
        "d3", "d1", "d2", "d1-plus-d2"]
    values = {r["candidate_id"]: r["value"] for r in body["ranked"]}
    assert values["d3"] == pytest.approx(11684.286, abs=0.01)


def test_what_if_endpoint(client):
    put_example(client, "example2")
    response = client.post("/scenarios/fleet-telemetry/what-if",
                           json={"candidate_id": "d1",
                                 "overrides": {"icf": 2.0}})
    assert response.status_code == 200
    body = response.json()
    assert body["after"]["value"] == pytest.approx(2 * body["before"]["value"])

    bad = client.post("/scenarios/fleet-telemetry/what-if",
                      json={"candidate_id": "d1",
                            "overrides": {"discount": 0.5}})
    assert bad.status_code == 400

    incomplete = client.post("/scenarios/fleet-telemetry/what-if",
                             json={"overrides": {}})
    assert incomplete.status_code == 400


def test_store_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DATAVALOR_STORE_DIR", str(tmp_path / "env-store"))
    app = create_app()
    with TestClient(app) as tc:
        put_example(tc, "example1")
    assert (tmp_path / "env-store" / "greenroute-traffic.json").exists()
    # a fresh app over the same directory sees the persisted scenario
    with TestClient(create_app()) as tc:
        assert tc.get("/scenarios").json() == {"scenarios": ["greenroute-traffic"]}
