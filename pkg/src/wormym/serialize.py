"""Deterministic CSV/JSON artifact writers.

Every artifact is a pair: a CSV holding the data table and a JSON sidecar
holding the provenance (command parameters, package version, column
schema).  Identical inputs produce bit-identical files: floats are
serialized with shortest round-trip repr, JSON keys are sorted, and no
wall-clock values enter either file.  Each invocation instead appends one
timestamped line to run.log next to the artifacts, so the when lives
outside the what.
"""
from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .errors import PreconditionError
from .spectra import ModeSet
from .statics import StaticProfile
from .evolution import Trajectory

OUTDIR_ENV = "WORMYM_OUTDIR"


def resolve_outdir(explicit: str | None = None) -> Path:
    """Output directory: explicit argument, else $WORMYM_OUTDIR, else cwd."""
    root = explicit or os.environ.get(OUTDIR_ENV) or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return f"{_fmt(value.real)}{value.imag:+}j"
    return repr(float(value))


def write_csv(path: Path, columns: Mapping[str, Sequence]) -> Path:
    """One table, columns as named equal-length sequences."""
    cols = {name: np.asarray(vals) for name, vals in columns.items()}
    if not cols:
        raise PreconditionError("refusing to write an empty table")
    lengths = {len(v) for v in cols.values()}
    if len(lengths) != 1:
        raise PreconditionError(f"ragged columns: lengths {sorted(lengths)}")
    lines = [",".join(cols)]
    for row in zip(*cols.values()):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(_jsonable(payload), sort_keys=True, indent=1)
                    + "\n")
    return path


def provenance(command: str, parameters: dict) -> dict:
    """Header sufficient to re-run the command; no wall-clock content."""
    return {
        "command": command,
        "parameters": _jsonable(parameters),
        "package": "wormym",
        "version": __version__,
    }


def log_run(outdir: Path, command: str, artifacts: list[Path]) -> None:
    """Append the timestamped invocation record next to the artifacts."""
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    names = " ".join(p.name for p in artifacts)
    with (outdir / "run.log").open("a") as fh:
        fh.write(f"{stamp} {command} -> {names}\n")


def save_table(outdir: Path, stem: str, columns: Mapping[str, Sequence],
               header: dict) -> list[Path]:
    csv_path = write_csv(outdir / f"{stem}.csv", columns)
    header = dict(header)
    header["columns"] = list(columns)
    json_path = write_json(outdir / f"{stem}.json", header)
    return [csv_path, json_path]


# ---------------------------------------------------------------------------
# domain objects

def profile_columns(profile: StaticProfile, n_points: int = 401
                    ) -> dict[str, np.ndarray]:
    """(x, r, W) samples on a uniform x-grid; the ends sit at the tails."""
    x = np.linspace(-1.0, 1.0, n_points)
    r = np.arctanh(np.clip(x, -1.0 + 1e-16, 1.0 - 1e-16))
    return {"x": x, "r": r, "W": profile.value_at(r)}


def profile_summary(profile: StaticProfile) -> dict:
    return {
        "label": profile.label,
        "kind": profile.kind,
        "parity": profile.parity,
        "n": profile.n,
        "shoot": profile.shoot,
        "w_inf": profile.w_inf,
        "energy": profile.energy,
        "virial_residual": abs(profile.virial_lhs - profile.virial_rhs),
        "ell": profile.params.ell,
        "r_max": profile.r_max,
    }


def save_profile(outdir: Path, profile: StaticProfile, stem: str,
                 header: dict, n_points: int = 401) -> list[Path]:
    cols = profile_columns(profile, n_points)
    header = dict(header)
    header["profile"] = profile_summary(profile)
    return save_table(outdir, stem, cols, header)


def modeset_payload(modes: ModeSet) -> dict:
    return {
        "background": modes.background,
        "ell": None if modes.params is None else modes.params.ell,
        "unstable_count": modes.unstable_count,
        "modes": [
            {"re": m.lam.real, "im": m.lam.imag, "parity": m.parity,
             "source": m.source}
            for m in modes
        ],
    }


def save_modeset(outdir: Path, modes: ModeSet, stem: str,
                 header: dict) -> list[Path]:
    payload = dict(header)
    payload.update(modeset_payload(modes))
    return [write_json(outdir / f"{stem}.json", payload)]


def trajectory_columns(traj: Trajectory, observables: Sequence[float] = ()
                       ) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {"tau": traj.times}
    for n in range(traj.coeffs.shape[1]):
        cols[f"a{n}"] = traj.coeffs[:, n]
    for n in range(traj.coeffs_dot.shape[1]):
        cols[f"adot{n}"] = traj.coeffs_dot[:, n]
    for x in observables:
        cols[f"W({float(x):g})"] = traj.field_at(float(x))
    return cols


def save_trajectory(outdir: Path, traj: Trajectory, stem: str,
                    header: dict) -> list[Path]:
    cols = trajectory_columns(traj, traj.config.obs_x)
    header = dict(header)
    header["final_state"] = state_payload(traj.final_state)
    if not traj.linear:
        header["final_energy"] = float(traj.energy[-1])
    return save_table(outdir, stem, cols, header)


def state_payload(state) -> dict:
    return {
        "tau": state.tau,
        "a": state.a.coeffs,
        "a_dot": state.a_dot.coeffs,
        "ell": state.params.ell,
    }
