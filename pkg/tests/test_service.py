"""HTTP layer: routes, model validation, and error mapping."""

import pytest
from fastapi.testclient import TestClient

from proxbound import __version__
from proxbound.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


def test_threshold_exact(client):
    r = client.post("/threshold", json={"expr": "compose(-(1/2)*u^2, -2*x)"})
    assert r.status_code == 200
    body = r.json()
    assert body["result"]["kind"] == "exact"
    assert body["result"]["value"] == 4.0
    assert body["exit_code"] == 0
    ids = {e["paper_id"] for e in body["result"]["trace"]}
    assert "CompProp.iii" in ids


def test_threshold_npb_exit_code(client):
    r = client.post("/threshold", json={"expr": "x^3"})
    assert r.status_code == 200
    body = r.json()
    assert body["result"]["kind"] == "not_prox_bounded"
    assert body["result"]["lo"] == "inf"
    assert body["exit_code"] == 3


def test_threshold_unknown_exit_code(client):
    r = client.post("/threshold", json={"expr": "compose(-(u^2), x^2)"})
    assert r.status_code == 200
    body = r.json()
    assert body["result"]["kind"] == "unknown"
    assert body["exit_code"] == 4


def test_parse_error_is_400_with_position(client):
    r = client.post("/threshold", json={"expr": "x +"})
    assert r.status_code == 400
    assert "position 3" in r.json()["detail"]


def test_envelope_point(client):
    r = client.post("/envelope", json={"expr": "abs(x)", "r": 1, "x": [2]})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == pytest.approx(1.5, abs=1e-6)
    assert body["exit_code"] == 0


def test_envelope_divergent_point(client):
    r = client.post("/envelope", json={"expr": "-(x^2)", "r": 1, "x": [0]})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == "-inf"
    assert body["exit_code"] == 3
    assert body["witness"] is not None


def test_envelope_dimension_mismatch(client):
    r = client.post("/envelope", json={"expr": "abs(x)", "r": 1, "x": [1, 2]})
    assert r.status_code == 400


def test_envelope_negative_r_rejected(client):
    r = client.post("/envelope", json={"expr": "x^2", "r": -1, "x": [0]})
    assert r.status_code == 422  # model validation


def test_grid_function_only(client):
    r = client.post("/envelope/grid", json={
        "expr": "x^2", "function_only": True,
        "ranges": [{"lo": 0, "hi": 1}], "steps": 3})
    assert r.status_code == 200
    body = r.json()
    assert body["columns"] == ["x", "value"]
    assert body["rows"] == [[0.0, 0.0], [0.5, 0.25], [1.0, 1.0]]


def test_grid_requires_r_without_function_only(client):
    r = client.post("/envelope/grid", json={
        "expr": "x^2", "ranges": [{"lo": 0, "hi": 1}]})
    assert r.status_code == 422


def test_grid_two_dim_row_major(client):
    r = client.post("/envelope/grid", json={
        "expr": "x*y", "function_only": True,
        "ranges": [{"lo": 0, "hi": 1}, {"lo": 0, "hi": 2}], "steps": 2})
    body = r.json()
    assert body["columns"] == ["x", "y", "value"]
    # x is the outer loop
    assert body["rows"] == [[0.0, 0.0, 0.0], [0.0, 2.0, 0.0],
                            [1.0, 0.0, 0.0], [1.0, 2.0, 2.0]]


def test_grid_diverged_everywhere(client):
    r = client.post("/envelope/grid", json={
        "expr": "-(x^2)", "r": 1,
        "ranges": [{"lo": -1, "hi": 1}], "steps": 3})
    body = r.json()
    assert body["diverged_everywhere"] is True
    assert body["message"] == "r below threshold"
    assert body["exit_code"] == 3


def test_prox_route(client):
    r = client.post("/prox", json={"expr": "abs(x)", "r": 1, "x": [2]})
    assert r.status_code == 200
    body = r.json()
    assert body["points"][0][0] == pytest.approx(1.0, abs=1e-6)


def test_prox_undefined_maps_to_422(client):
    r = client.post("/prox", json={"expr": "-(x^2)", "r": 1, "x": [0]})
    assert r.status_code == 422
    assert "unbounded below" in r.json()["detail"]


def test_conjugate_route(client):
    r = client.post("/conjugate", json={"expr": "(1/2)*x^2", "y": [2]})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(2.0, abs=1e-6)


def test_conjugate_infinite_value_is_ok(client):
    r = client.post("/conjugate", json={"expr": "abs(x)", "y": [2]})
    assert r.status_code == 200
    body = r.json()
    assert body["value"] == "inf"
    assert body["exit_code"] == 0


def test_estimate_both_methods(client):
    r = client.post("/estimate", json={"expr": "-(x^2)", "method": "both"})
    body = r.json()
    assert set(body["results"]) == {"liminf", "bisection"}
    assert body["estimates"]["liminf"] == pytest.approx(2.0, abs=0.05)
    assert body["disagreement"] is not None and body["disagreement"] <= 0.1
    assert body["warning"] is None


def test_estimate_npb_exit(client):
    r = client.post("/estimate", json={"expr": "x^3"})
    body = r.json()
    assert body["exit_code"] == 3
    assert body["estimates"] == {"liminf": "inf", "bisection": "inf"}


def test_estimate_single_method(client):
    r = client.post("/estimate", json={"expr": "sin(x)", "method": "liminf"})
    body = r.json()
    assert list(body["results"]) == ["liminf"]
    assert body["disagreement"] is None


def test_check_expression(client):
    r = client.post("/check", json={"expr": "abs(x)"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["exit_code"] == 0
    assert {s["name"] for s in body["suites"]} >= {"fenchel-identity"}


def test_check_requires_one_target(client):
    assert client.post("/check", json={}).status_code == 422
    assert client.post(
        "/check", json={"expr": "x^2", "corpus": True}).status_code == 422


def test_solver_options_accepted(client):
    r = client.post("/envelope", json={
        "expr": "x^2", "r": 2, "x": [1],
        "options": {"max_radius": 64.0, "divergence_bound": 1e9}})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(0.5, abs=1e-6)


def test_unknown_option_rejected(client):
    r = client.post("/envelope", json={
        "expr": "x^2", "r": 2, "x": [1], "options": {"max_radius": -5}})
    assert r.status_code == 422
