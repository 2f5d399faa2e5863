import pytest
from fastapi.testclient import TestClient

from bates_adi.service import create_app


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    cache = tmp_path_factory.mktemp("refcache")
    return TestClient(create_app(cache_dir=cache))


SMALL_GRID = {"m1": 30, "m2": 12}


def test_healthz(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_cases_listing(client):
    data = client.get("/cases").json()
    names = [c["name"] for c in data["cases"]]
    assert names == ["I", "II", "III", "IV"]
    case4 = data["cases"][3]
    assert case4["stiff_jump"] and case4["feller_violated"]
    assert case4["params"]["lambda"] == 10.0


def test_case_detail_and_unknown(client):
    assert client.get("/cases/I").json()["params"]["kappa"] == 2.0
    assert client.get("/cases/nope").status_code == 404


def test_price_named_case(client):
    resp = client.post("/price", json={
        "case": "I",
        "grid": SMALL_GRID,
        "scheme": {"adaptation": 1, "family": "mcs", "theta": 0.5},
        "n": 40,
        "query_points": [[100.0, 0.04]],
    })
    assert resp.status_code == 200
    value = resp.json()["values"][0]
    assert 2.0 < value < 20.0


def test_price_custom_model(client):
    model = {"kappa": 2.0, "eta": 0.04, "sigma": 0.25, "rho": -0.5, "r": 0.03,
             "lambda": 0.2, "gamma": -0.5, "delta": 0.4, "T": 0.5, "K": 100.0}
    resp = client.post("/price", json={
        "model": model,
        "grid": SMALL_GRID,
        "n": 40,
        "query_points": [[100.0, 0.04]],
    })
    assert resp.status_code == 200
    named = client.post("/price", json={
        "case": "I", "grid": SMALL_GRID, "n": 40, "query_points": [[100.0, 0.04]],
    })
    assert resp.json()["values"] == named.json()["values"]


def test_price_validation_errors(client):
    # both case and model
    model = {"kappa": 1, "eta": 0.1, "sigma": 0.2, "rho": 0.0, "r": 0.0,
             "lambda": 1, "gamma": 0.0, "delta": 0.1, "T": 1, "K": 100}
    assert client.post("/price", json={
        "case": "I", "model": model, "query_points": [[1, 1]],
    }).status_code == 422
    # neither
    assert client.post("/price", json={"query_points": [[1, 1]]}).status_code == 422
    # unknown keys rejected
    assert client.post("/price", json={
        "case": "I", "query_points": [[1, 1]], "bogus": 1,
    }).status_code == 422
    # out-of-domain query -> 400 with diagnostic
    resp = client.post("/price", json={
        "case": "I", "grid": SMALL_GRID, "n": 5, "query_points": [[1e9, 0.0]],
    })
    assert resp.status_code == 400
    assert "outside" in resp.json()["detail"]


def test_eigenvalues_endpoint(client):
    resp = client.post("/eigenvalues", json={"case": "II", "grid": SMALL_GRID})
    assert resp.status_code == 200
    data = resp.json()
    assert data["m1"] == 30 and data["m2"] == 12
    assert len(data["eigenvalues"]) == 29
    assert data["max_abs"] <= 1.0 + 1e-8
    assert data["csv"].splitlines()[0] == "case,m1,m2,re,im"


def test_sweep_endpoint(client):
    resp = client.post("/sweep", json={
        "case": "I",
        "grid": SMALL_GRID,
        "schemes": [
            {"adaptation": 1, "family": "mcs", "theta": 0.3333333333333333},
            {"adaptation": 3, "family": "do", "theta": 0.5},
        ],
        "n_values": [20, 40],
        "n_ref": 400,
    })
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["rows"]) == 4
    assert data["rows"][0]["n"] == 20
    assert data["rows"][1]["error"] < data["rows"][0]["error"]
    assert data["csv"].splitlines()[0] == "case,adaptation,family,theta,N,error"
    # rerun is byte-identical (cached reference, deterministic steppers)
    again = client.post("/sweep", json={
        "case": "I",
        "grid": SMALL_GRID,
        "schemes": [
            {"adaptation": 1, "family": "mcs", "theta": 0.3333333333333333},
            {"adaptation": 3, "family": "do", "theta": 0.5},
        ],
        "n_values": [20, 40],
        "n_ref": 400,
    })
    assert again.json()["csv"] == data["csv"]


def test_stability_endpoint(client):
    resp = client.post("/stability", json={
        "theorem": "L2", "theta": 0.5, "samples": 20_000, "seed": 7,
    })
    assert resp.status_code == 200
    data = resp.json()
    assert data["passed"] is True
    assert data["max_abs"] <= 2.0 + 1e-12
    assert "passed: True" in data["text"]
    assert data["shard_csv"].splitlines()[0] == "shard,max_abs"


def test_stability_unknown_theorem(client):
    assert client.post("/stability", json={"theorem": "T99"}).status_code == 422


def test_scheme_validation(client):
    assert client.post("/price", json={
        "case": "I",
        "scheme": {"adaptation": 5},
        "query_points": [[100, 0.04]],
    }).status_code == 422
    assert client.post("/price", json={
        "case": "I",
        "scheme": {"family": "strang"},
        "query_points": [[100, 0.04]],
    }).status_code == 422
