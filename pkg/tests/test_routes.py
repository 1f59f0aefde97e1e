from __future__ import annotations

from fastapi.testclient import TestClient

from services.instance_loader import dump_instance
from services.instance_store import InstanceStore
from webapi import create_app

from conftest import random_crisp

AUTH_TOKEN = "super-secret"

POINTS = "4\n0 0 10\n1 0 20\n5 5 30\n6 5 5\n"


def _auth_headers():
    return {"Authorization": f"Bearer {AUTH_TOKEN}"}


def _client(**kwargs) -> TestClient:
    return TestClient(create_app(InstanceStore(), auth_token=AUTH_TOKEN, **kwargs))


def _create(client: TestClient, **overrides) -> dict:
    body = {"points": POINTS, "radius": 2.0, "budget": "card:1", "seed": 3, "name": "tiny"}
    body.update(overrides)
    response = client.post("/instances", json=body, headers=_auth_headers())
    assert response.status_code == 201, response.text
    return response.json()


def test_routes_require_authentication():
    client = _client()

    response = client.post("/instances", json={"points": POINTS, "radius": 2.0})
    assert response.status_code == 401

    response = client.post(
        "/instances",
        json={"points": POINTS, "radius": 2.0},
        headers={"Authorization": "Bearer wrong"},
    )
    assert response.status_code == 401

    response = client.get("/instances/whatever")
    assert response.status_code == 401


def test_authentication_can_be_disabled(monkeypatch):
    monkeypatch.delenv("FMCLP_API_TOKEN", raising=False)
    client = TestClient(create_app(InstanceStore()))
    response = client.post("/instances", json={"points": POINTS, "radius": 2.0})
    assert response.status_code == 201


def test_token_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("FMCLP_API_TOKEN", AUTH_TOKEN)
    client = TestClient(create_app(InstanceStore()))
    assert client.post("/instances", json={"points": POINTS, "radius": 2.0}).status_code == 401
    response = client.post("/instances", json={"points": POINTS, "radius": 2.0}, headers=_auth_headers())
    assert response.status_code == 201


def test_instance_upload_and_lookup():
    client = _client()
    summary = _create(client)

    assert summary["n"] == 4 and summary["m"] == 4
    assert summary["fuzzy"] is True
    assert summary["seed"] == 3
    assert summary["name"] == "tiny"
    lo, mid, hi = summary["budget"]
    assert lo <= mid == 1.0 <= hi

    response = client.get("/instances/{}".format(summary["id"]), headers=_auth_headers())
    assert response.status_code == 200
    assert response.json() == summary


def test_crisp_only_upload_from_canonical_document():
    client = _client()
    document = dump_instance(random_crisp(4, 8, 5))
    summary = _create(client, points=None, document=document, radius=None, fuzzify=False)

    assert summary["fuzzy"] is False
    assert summary["seed"] is None and summary["spread"] is None
    assert summary["m"] == 5
    assert len(set(summary["budget"])) == 1


def test_instance_upload_validation_errors():
    client = _client()

    both = client.post(
        "/instances", json={"points": POINTS, "document": "<Instance />", "radius": 2.0}, headers=_auth_headers()
    )
    assert both.status_code == 422

    neither = client.post("/instances", json={"radius": 2.0}, headers=_auth_headers())
    assert neither.status_code == 422

    spread = client.post("/instances", json={"points": POINTS, "radius": 2.0, "spread": 0}, headers=_auth_headers())
    assert spread.status_code == 422

    no_radius = client.post("/instances", json={"points": POINTS}, headers=_auth_headers())
    assert no_radius.status_code == 422
    assert "radius" in no_radius.json()["detail"]

    card_with_random_costs = client.post(
        "/instances",
        json={"points": POINTS, "radius": 2.0, "costs": "normal", "budget": "card:1"},
        headers=_auth_headers(),
    )
    assert card_with_random_costs.status_code == 422

    malformed = client.post("/instances", json={"points": "2\n0 0 1\n"}, headers=_auth_headers())
    assert malformed.status_code == 422


def test_unknown_instance_returns_404():
    client = _client()
    assert client.get("/instances/missing", headers=_auth_headers()).status_code == 404
    response = client.post("/instances/missing/solve", json={}, headers=_auth_headers())
    assert response.status_code == 404


def test_crisp_solve_includes_cross_evaluation():
    client = _client()
    instance_id = _create(client)["id"]

    response = client.post(
        "/instances/{}/solve".format(instance_id), json={"mode": "crisp"}, headers=_auth_headers()
    )
    assert response.status_code == 200
    payload = response.json()
    assert payload["mode"] == "crisp"
    assert payload["solution"]["open"] == [2]
    assert payload["solution"]["F"] == [35.0, 35.0, 35.0]
    assert payload["solution"]["covered"] == 2
    assert payload["cross"] is not None
    assert payload["cross"]["F"][1] == 35.0


def test_fuzzy_solve_modes():
    client = _client()
    instance_id = _create(client)["id"]
    url = "/instances/{}/solve".format(instance_id)

    for body in (
        {"mode": "single", "r": 3},
        {"mode": "csp1"},
        {"mode": "cspinf"},
        {"mode": "tcheby", "weights": {"l1": 1, "l2": 2, "l3": 1}},
    ):
        response = client.post(url, json=body, headers=_auth_headers())
        assert response.status_code == 200, body
        solution = response.json()["solution"]
        assert solution["feasible"] is True
        assert response.json()["cross"] is None

    bad = client.post(url, json={"mode": "single", "r": 4}, headers=_auth_headers())
    assert bad.status_code == 422
    negative = client.post(url, json={"weights": {"l1": -1, "l2": 0, "l3": 0}}, headers=_auth_headers())
    assert negative.status_code == 422


def test_frontier_run_with_oracle():
    client = _client()
    instance_id = _create(client)["id"]

    response = client.post(
        "/instances/{}/frontier".format(instance_id),
        json={"early_stop": False, "oracle": True},
        headers=_auth_headers(),
    )
    assert response.status_code == 200
    payload = response.json()
    assert len(payload["trace"]) == 9
    assert payload["solutions"]
    assert all(solution["oracle_verified"] is True for solution in payload["solutions"])
    assert {entry["path"] for entry in payload["trace"]} <= {"direct", "checked-delta0", "improved"}
    indices = {entry["solution"] for entry in payload["trace"]}
    assert indices == set(range(len(payload["solutions"])))


def test_frontier_defaults_and_custom_weights():
    client = _client()
    instance_id = _create(client)["id"]
    url = "/instances/{}/frontier".format(instance_id)

    default = client.post(url, headers=_auth_headers())
    assert default.status_code == 200
    assert default.json()["solutions"][0]["oracle_verified"] is None

    custom = client.post(
        url, json={"weights": [{"l1": 0, "l2": 1, "l3": 0, "rho": 0}]}, headers=_auth_headers()
    )
    assert custom.status_code == 200
    assert len(custom.json()["trace"]) == 1

    empty = client.post(url, json={"weights": []}, headers=_auth_headers())
    assert empty.status_code == 422


def test_oracle_over_cap_returns_413():
    client = _client(oracle_cap=2)
    instance_id = _create(client)["id"]
    response = client.post(
        "/instances/{}/frontier".format(instance_id), json={"oracle": True}, headers=_auth_headers()
    )
    assert response.status_code == 413
