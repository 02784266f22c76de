"""Artifact writers: formatting, determinism, and the pairing contract."""
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wormym import __version__
from wormym.errors import PreconditionError
from wormym.evolution import EvolConfig, EvolState, evolve
from wormym.galerkin import ChebSeries
from wormym.params import PhysParams
from wormym.serialize import (
    OUTDIR_ENV,
    _fmt,
    log_run,
    modeset_payload,
    profile_columns,
    profile_summary,
    provenance,
    resolve_outdir,
    save_profile,
    save_table,
    save_trajectory,
    trajectory_columns,
    write_csv,
    write_json,
)
from wormym.spectra import pencil_spectrum


# -- scalar formatting -------------------------------------------------------

def test_fmt_scalars():
    assert _fmt("label") == "label"
    assert _fmt(True) == "true"
    assert _fmt(np.bool_(False)) == "false"
    assert _fmt(7) == "7"
    assert _fmt(np.int64(-3)) == "-3"
    assert _fmt(0.1) == "0.1"
    assert _fmt(complex(0.25, -1.5)) == "0.25-1.5j"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_floats_round_trip(x):
    assert float(_fmt(x)) == x


# -- csv ---------------------------------------------------------------------

def test_write_csv_layout(tmp_path):
    path = write_csv(tmp_path / "t.csv",
                     {"tau": [0.0, 0.5], "a0": [1.0, 0.25], "tag": ["p", "q"]})
    assert path.read_text() == "tau,a0,tag\n0.0,1.0,p\n0.5,0.25,q\n"


def test_write_csv_rejects_ragged(tmp_path):
    with pytest.raises(PreconditionError):
        write_csv(tmp_path / "t.csv", {"a": [1.0, 2.0], "b": [3.0]})


def test_write_csv_rejects_empty(tmp_path):
    with pytest.raises(PreconditionError):
        write_csv(tmp_path / "t.csv", {})


# -- json --------------------------------------------------------------------

def test_write_json_sorted_and_typed(tmp_path):
    payload = {"z": np.float64(0.5), "a": np.arange(3),
               "lam": complex(1.0, -2.0), "n": np.int32(4)}
    path = write_json(tmp_path / "t.json", payload)
    text = path.read_text()
    assert text.index('"a"') < text.index('"lam"') < text.index('"z"')
    back = json.loads(text)
    assert back == {"z": 0.5, "a": [0, 1, 2],
                    "lam": {"re": 1.0, "im": -2.0}, "n": 4}


def test_write_json_keeps_booleans(tmp_path):
    path = write_json(tmp_path / "t.json", {"linear": False, "ok": np.True_})
    assert json.loads(path.read_text()) == {"linear": False, "ok": True}


def test_json_bytes_deterministic(tmp_path):
    payload = {"b": [0.1, 0.2], "a": {"nested": np.float64(1.0 / 3.0)}}
    first = write_json(tmp_path / "one.json", payload).read_bytes()
    second = write_json(tmp_path / "two.json", payload).read_bytes()
    assert first == second


def test_provenance_shape():
    head = provenance("spectrum", {"ell": 2.5, "M": 40})
    assert head == {"command": "spectrum",
                    "parameters": {"ell": 2.5, "M": 40},
                    "package": "wormym",
                    "version": __version__}


def test_log_run_appends(tmp_path):
    log_run(tmp_path, "wormym static --ell 2.5", [tmp_path / "a.csv"])
    log_run(tmp_path, "wormym static --ell 2.5", [tmp_path / "a.csv"])
    lines = (tmp_path / "run.log").read_text().splitlines()
    assert len(lines) == 2
    assert all(line.endswith("wormym static --ell 2.5 -> a.csv")
               for line in lines)


def test_save_table_writes_pair(tmp_path):
    paths = save_table(tmp_path, "demo", {"x": [1.0]}, provenance("demo", {}))
    assert [p.name for p in paths] == ["demo.csv", "demo.json"]
    header = json.loads(paths[1].read_text())
    assert header["columns"] == ["x"]
    assert header["command"] == "demo"


# -- output directory --------------------------------------------------------

def test_resolve_outdir_precedence(tmp_path, monkeypatch):
    assert resolve_outdir() == Path(".")
    assert resolve_outdir() == resolve_outdir(None)
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "env"))
    assert resolve_outdir() == tmp_path / "env"
    assert (tmp_path / "env").is_dir()
    explicit = tmp_path / "explicit"
    assert resolve_outdir(str(explicit)) == explicit
    assert explicit.is_dir()


# -- domain objects ----------------------------------------------------------

def test_profile_columns_and_summary(w1_35, tmp_path):
    cols = profile_columns(w1_35, n_points=11)
    assert list(cols) == ["x", "r", "W"]
    assert len(cols["x"]) == 11
    assert cols["x"][0] == -1.0 and cols["x"][-1] == 1.0
    assert cols["W"][-1] == pytest.approx(w1_35.w_inf, abs=1e-9)
    assert cols["W"][0] == pytest.approx(-w1_35.w_inf, abs=1e-9)

    summary = profile_summary(w1_35)
    assert summary["label"] == "W1" and summary["parity"] == "odd"
    assert summary["virial_residual"] < 1e-6

    paths = save_profile(tmp_path, w1_35, "w1", provenance("static", {}),
                         n_points=11)
    header = json.loads(paths[1].read_text())
    assert header["profile"]["label"] == "W1"
    assert header["columns"] == ["x", "r", "W"]


def test_modeset_payload(w1_35):
    modes = pencil_spectrum(w1_35, M=40)
    payload = modeset_payload(modes)
    assert payload["background"] == "W1"
    assert payload["ell"] == 3.5
    assert payload["unstable_count"] == modes.unstable_count
    assert len(payload["modes"]) == len(modes.modes)
    assert {"re", "im", "parity", "source"} == set(payload["modes"][0])


def test_trajectory_columns_naming(tmp_path):
    params = PhysParams(0.5)
    state = EvolState(ChebSeries.from_map({1: 0.1}, N=6),
                      ChebSeries.from_map({}, N=6), tau=0.0, params=params)
    config = EvolConfig(N=6, tau_end=0.5, stride=0.25, obs_x=(0.0, -0.5))
    traj = evolve(state, config)
    cols = trajectory_columns(traj, config.obs_x)
    assert list(cols) == (["tau"] + [f"a{n}" for n in range(7)]
                          + [f"adot{n}" for n in range(7)]
                          + ["W(0)", "W(-0.5)"])
    paths = save_trajectory(tmp_path, traj, "run", provenance("evolve", {}))
    header = json.loads(paths[1].read_text())
    assert header["final_state"]["tau"] == pytest.approx(0.5)
    assert "final_energy" in header
    assert header["columns"][-1] == "W(-0.5)"
