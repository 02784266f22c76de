"""HTTP layer: payload shapes, light value checks, and error mapping.

Heavy endpoints (bisect, lifetimes) are exercised through the analysis
tests and the acceptance run; here the focus is the request/response
contract and the status-code taxonomy.
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from wormym.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def _post(client, path, payload, expect=200):
    resp = client.post(path, json=payload)
    assert resp.status_code == expect, resp.text
    return resp.json()


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["package"] == "wormym"


# -- spectra -----------------------------------------------------------------

def test_spectrum_star_matches_closed_form(client):
    body = _post(client, "/spectrum",
                 {"ell": 2.5, "background": "star", "M": 40})
    assert body["unstable_count"] == 3
    assert body["max_closed_form_gap"] < 1e-8
    res = [m["re"] for m in body["modes"]]
    assert res == sorted(res, reverse=True)
    assert all(m["parity"] in ("even", "odd") for m in body["modes"])
    assert body["closed_form"]


def test_spectrum_ground_matches_closed_form(client):
    body = _post(client, "/spectrum",
                 {"ell": 0.5, "background": "ground", "M": 40})
    assert body["unstable_count"] == 0
    assert body["max_closed_form_gap"] < 1e-8


def test_spectrum_excited_background_has_no_closed_form(client):
    body = _post(client, "/spectrum",
                 {"ell": 3.5, "background": "w1", "M": 40})
    assert body["closed_form"] is None
    assert body["max_closed_form_gap"] is None
    assert body["unstable_count"] == 1


# -- statics -----------------------------------------------------------------

def test_static_solve(client):
    body = _post(client, "/static/solve",
                 {"ell": 3.5, "n": 2, "n_points": 101})
    assert body["summary"]["label"] == "W2"
    assert body["summary"]["parity"] == "even"
    assert body["summary"]["virial_residual"] < 1e-6
    assert set(body["table"]) == {"x", "r", "W"}
    assert all(len(col) == 101 for col in body["table"].values())


def test_static_solve_missing_solution(client):
    body = _post(client, "/static/solve", {"ell": 0.5, "n": 1}, expect=400)
    assert body["error"] == "NoSuchSolutionError"


def test_static_enumerate(client):
    body = _post(client, "/static/enumerate", {"ell": 2.5, "n_points": 51})
    assert body["count"] == 4
    labels = [p["summary"]["label"] for p in body["profiles"]]
    assert labels == ["W0", "Wstar", "W1", "W2"]


# -- evolution ---------------------------------------------------------------

def test_evolve_nonlinear(client):
    body = _post(client, "/evolve",
                 {"ell": 3.5, "data": {"1": 1.0, "4": 1.0, "5": 1.0},
                  "N": 16, "tau_end": 2.0, "stride": 0.5, "obs_x": [0.0]})
    assert body["linear"] is False
    assert body["times"] == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert len(body["coeffs"][0]) == 17
    assert body["energy"][-1] <= body["energy"][0] + 1e-10
    assert body["balance_residual"] is not None
    assert "W(0)" in body["observables"]
    assert body["final_state"]["tau"] == pytest.approx(2.0)


def test_evolve_linearized(client):
    body = _post(client, "/evolve",
                 {"ell": 3.5, "data": {"0": 1e-3}, "N": 12, "tau_end": 1.0,
                  "stride": 0.5, "background": "star"})
    assert body["linear"] is True
    assert body["energy"] is None
    assert body["balance_residual"] is None


# -- fitting and convergence ---------------------------------------------------

def test_fit_round_trip(client):
    tau = np.linspace(0.0, 20.0, 201)
    y = 2.5 * np.exp(-0.7 * tau)
    body = _post(client, "/fit",
                 {"model": "exponential", "tau": tau.tolist(),
                  "y": y.tolist(), "window": [2.0, 18.0]})
    assert body["rate"] == pytest.approx(0.7, rel=1e-9)
    assert body["amplitude"] == pytest.approx(2.5, rel=1e-9)
    assert body["frequency"] is None


def test_converge(client):
    body = _post(client, "/converge",
                 {"ell": 0.5, "data": {"1": 0.5}, "N_list": [6, 10],
                  "N_ref": 14, "tau": 0.5})
    assert [row[0] for row in body["rows"]] == [6, 10]
    assert body["rows"][1][1] < body["rows"][0][1]


def test_figure_round_trip(client):
    body = _post(client, "/figure/3", {"overrides": {"N": 12}})
    assert body["figure"] == 3
    assert body["summary"]["N"] == 12
    table = body["tables"]["snapshots"]
    assert "x" in table and "W(tau=8)" in table


# -- error mapping -------------------------------------------------------------

def test_integer_ell_maps_to_400(client):
    body = _post(client, "/static/enumerate", {"ell": 2.0}, expect=400)
    assert body["error"] == "IntegerEllError"


def test_unknown_background_maps_to_400(client):
    body = _post(client, "/spectrum", {"ell": 2.5, "background": "nope"},
                 expect=400)
    assert body["error"] == "PreconditionError"


def test_empty_initial_data_maps_to_422(client):
    _post(client, "/evolve", {"ell": 3.5, "data": {}}, expect=422)


def test_unknown_fit_model_maps_to_422(client):
    _post(client, "/fit", {"model": "spline", "tau": [0, 1], "y": [1, 2],
                           "window": [0, 1]}, expect=422)


def test_short_fit_window_maps_to_400(client):
    body = _post(client, "/fit",
                 {"model": "exponential", "tau": [0.0, 1.0, 2.0],
                  "y": [1.0, 0.5, 0.25], "window": [5.0, 6.0]}, expect=400)
    assert body["error"] == "InsufficientDataError"


def test_unknown_figure_maps_to_400(client):
    body = _post(client, "/figure/99", {}, expect=400)
    assert "1..11" in body["detail"]


def test_unknown_figure_override_maps_to_400(client):
    _post(client, "/figure/3", {"overrides": {"bogus": 1}}, expect=400)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_maps_to_500(client):
    body = _post(client, "/evolve",
                 {"ell": 3.5, "data": {"1": 1.0}, "N": 24, "tau_end": 40.0,
                  "stride": 10.0, "stepper": "rk4", "dt": 10.0}, expect=500)
    assert body["error"] == "BlowupError"
