"""Command-line client for the service.

Each subcommand shapes a request, posts it to the service, and writes the
response as CSV/JSON artifact pairs in the output directory (--outdir,
else $WORMYM_OUTDIR, else the working directory).  By default the app is
mounted in-process, so no server needs to run; --server URL switches the
same client onto a remote instance, and `serve` starts one.

A plain key=value file (--config, or ./wormym.cfg when present) supplies
defaults for any long option of the active subcommand; explicit flags win.
Artifacts are deterministic: rerunning a command with identical parameters
rewrites byte-identical files, and the timestamped record of each run goes
to run.log instead of the data files.

Exit codes: 0 on success, 2 when the request is rejected (bad flags, out
of contract parameters), 3 when the computation itself fails.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
import warnings
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .serialize import (log_run, provenance, resolve_outdir, save_table,
                        write_json)

CONFIG_NAME = "wormym.cfg"


# ---------------------------------------------------------------------------
# option plumbing

class Opt:
    """One option: flag spelling, coercion, default, requiredness.

    The same coercion runs on command-line strings (via argparse) and on
    config-file values, so both spellings of every option behave alike.
    A None coercion marks a boolean switch (config value true/false).
    """

    def __init__(self, flag: str, coerce: Callable | None, default,
                 help: str, required: bool = False, metavar: str | None = None):
        self.flag = flag
        self.dest = flag.lstrip("-").replace("-", "_")
        self.coerce = coerce
        self.default = default
        self.help = help
        self.required = required
        self.metavar = metavar

    def add_to(self, parser: argparse.ArgumentParser) -> None:
        if not self.flag.startswith("-"):
            parser.add_argument(self.flag, type=self.coerce, help=self.help)
        elif self.coerce is None:
            parser.add_argument(self.flag, dest=self.dest,
                                action="store_true",
                                default=argparse.SUPPRESS, help=self.help)
        else:
            parser.add_argument(self.flag, dest=self.dest, type=self.coerce,
                                default=argparse.SUPPRESS, help=self.help,
                                metavar=self.metavar)


def _parse_data(text: str) -> dict:
    """Coefficient map 'n:value,n:value' -> {n: value}."""
    out = {}
    for item in text.split(","):
        if not item:
            continue
        try:
            n, _, v = item.partition(":")
            out[int(n)] = float(v)
        except ValueError:
            raise ValueError(f"bad coefficient entry '{item}'; want n:value")
    return out


def _parse_ints(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def _parse_floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s]


def _parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"bad switch value '{text}'")


def _parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ValueError(f"bad override '{text}'; want key=value")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def load_config(path: Path) -> dict[str, str]:
    """key=value lines; blank lines and # comments are skipped."""
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge(opts: list[Opt], ns: argparse.Namespace, config: dict[str, str],
           error: Callable) -> dict:
    """Layer defaults, config file, then explicit flags."""
    merged = {}
    for opt in opts:
        if hasattr(ns, opt.dest):
            merged[opt.dest] = getattr(ns, opt.dest)
        elif opt.dest in config:
            coerce = opt.coerce if opt.coerce is not None else _parse_bool
            try:
                merged[opt.dest] = coerce(config[opt.dest])
            except ValueError as exc:
                error(f"config {opt.dest}: {exc}")
        else:
            merged[opt.dest] = opt.default
        if opt.required and merged[opt.dest] is None:
            error(f"{opt.flag} is required")
    return merged


# ---------------------------------------------------------------------------
# service client

class ServiceClient:
    """POSTs to the in-process app, or to --server when given."""

    def __init__(self, server: str | None = None):
        if server is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient
            from .service import app
            self._http = TestClient(app, raise_server_exceptions=False)
        else:
            import httpx
            self._http = httpx.Client(base_url=server, timeout=None)

    def post(self, path: str, payload: dict) -> tuple[int, object]:
        response = self._http.post(path, json=payload)
        return response.status_code, response.json()


def _call(client: ServiceClient, path: str, payload: dict) -> dict:
    try:
        status, body = client.post(path, payload)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(3)
    if status == 200:
        return body
    if isinstance(body, dict):
        label = body.get("error", "rejected")
        detail = body.get("detail", body)
    else:
        label, detail = "rejected", body
    if not isinstance(detail, str):
        detail = json.dumps(detail)
    print(f"error: {label}: {detail}", file=sys.stderr)
    raise SystemExit(2 if status in (400, 422) else 3)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_static(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    if ns["all"] and ns["n"] is not None:
        print("error: --n and --all are mutually exclusive", file=sys.stderr)
        raise SystemExit(2)
    base = {"ell": ns["ell"], "r_max": ns["r_max"], "n_points": ns["points"]}
    stem = ns["stem"] or "static"
    if ns["n"] is None:
        profiles = _call(client, "/static/enumerate", base)["profiles"]
    else:
        profiles = [_call(client, "/static/solve", {**base, "n": ns["n"]})]
    prov = provenance("static", {**base, "n": ns["n"]})
    artifacts = []
    for item in profiles:
        summary = item["summary"]
        header = dict(prov)
        header["profile"] = summary
        artifacts += save_table(outdir, f"{stem}_{summary['label']}",
                                item["table"], header)
        print(f"{summary['label']:>6}  n={summary['n']}  "
              f"E={summary['energy']:.9g}  "
              f"virial={summary['virial_residual']:.3g}")
    if ns["n"] is None:
        rows = [item["summary"] for item in profiles]
        table = {key: [row[key] for row in rows]
                 for key in ("label", "n", "parity", "shoot", "w_inf",
                             "energy", "virial_residual")}
        artifacts += save_table(outdir, f"{stem}_energies", table, dict(prov))
    return artifacts


def _cmd_spectrum(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    payload = {"ell": ns["ell"], "background": ns["bg"], "M": ns["M"],
               "j_max": ns["j_max"]}
    body = _call(client, "/spectrum", payload)
    stem = ns["stem"] or f"spectrum_{ns['bg']}"
    table: dict[str, list] = {
        "re": [m["re"] for m in body["modes"]],
        "im": [m["im"] for m in body["modes"]],
        "parity": [m["parity"] for m in body["modes"]],
    }
    closed = body.get("closed_form")
    if closed:
        targets = np.array([complex(m["re"], m["im"]) for m in closed])
        nearest = [targets[np.argmin(np.abs(targets - complex(m["re"], m["im"])))]
                   for m in body["modes"]]
        table["closed_re"] = [z.real for z in nearest]
        table["closed_im"] = [z.imag for z in nearest]
        table["gap"] = [abs(complex(m["re"], m["im"]) - z)
                        for m, z in zip(body["modes"], nearest)]
    header = provenance("spectrum", payload)
    header.update({k: body[k] for k in ("background", "ell", "unstable_count",
                                        "modes", "closed_form",
                                        "max_closed_form_gap")})
    artifacts = save_table(outdir, stem, table, header)
    for k, mode in enumerate(body["modes"]):
        line = f"{mode['re']:+.9f} {mode['im']:+.9f}i  {mode['parity']:>5}"
        if closed:
            line += f"  gap={table['gap'][k]:.2e}"
        print(line)
    print(f"unstable modes: {body['unstable_count']}")
    if body.get("max_closed_form_gap") is not None:
        print(f"closed-form gap (leading modes): "
              f"{body['max_closed_form_gap']:.3e}")
    return artifacts


def _trajectory_table(body: dict) -> dict:
    coeffs = np.asarray(body["coeffs"])
    coeffs_dot = np.asarray(body["coeffs_dot"])
    table: dict[str, object] = {"tau": body["times"]}
    for n in range(coeffs.shape[1]):
        table[f"a{n}"] = coeffs[:, n]
    for n in range(coeffs_dot.shape[1]):
        table[f"adot{n}"] = coeffs_dot[:, n]
    for name, values in body["observables"].items():
        table[name] = values
    return table


def _cmd_evolve(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    payload = {"ell": ns["ell"], "data": ns["data"], "data_dot": ns["data_dot"],
               "N": ns["N"], "tau_end": ns["tau_end"], "stride": ns["stride"],
               "rtol": ns["rtol"], "atol": ns["atol"],
               "stepper": ns["stepper"], "dt": ns["dt"],
               "obs_x": ns["obs_x"], "background": ns["bg"]}
    body = _call(client, "/evolve", payload)
    header = provenance("evolve", payload)
    header["final_state"] = body["final_state"]
    header["linear"] = body["linear"]
    if body["balance_residual"] is not None:
        header["final_energy"] = body["energy"][-1]
        header["balance_residual"] = body["balance_residual"]
        print(f"final energy {body['energy'][-1]:.9g}, "
              f"balance residual {body['balance_residual']:.3e}")
    stem = ns["stem"] or "trajectory"
    artifacts = save_table(outdir, stem, _trajectory_table(body), header)
    print(f"{len(body['times'])} samples to tau={body['times'][-1]:g}")
    return artifacts


def _cmd_bisect(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    payload = {"ell": ns["ell"], "family": ns["family"], "base": ns["base"],
               "index": ns["index"], "c_range": [ns["c_lo"], ns["c_hi"]],
               "digits": ns["digits"], "N": ns["N"]}
    body = _call(client, "/bisect", payload)
    header = provenance("bisect", payload)
    header.update(body)
    stem = ns["stem"] or "bisect"
    table = {"c": [c for c, _ in body["lifetimes"]],
             "tau_commit": [t for _, t in body["lifetimes"]]}
    artifacts = save_table(outdir, stem, table, header)
    print(f"c* in [{body['c_lo']!r}, {body['c_hi']!r}]")
    print(f"c* = {body['c_star']!r}")
    print(f"attractor {body['attractor']} "
          f"(distance {body['attractor_distance']:.3e})")
    return artifacts


def _cmd_converge(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    n_ref = ns["N_ref"] if ns["N_ref"] is not None else max(ns["N"])
    entries = [n for n in ns["N"] if n < n_ref]
    if not entries:
        print("error: no truncation below the reference", file=sys.stderr)
        raise SystemExit(2)
    payload = {"ell": ns["ell"], "data": ns["data"], "N_list": entries,
               "N_ref": n_ref, "tau": ns["tau"]}
    body = _call(client, "/converge", payload)
    header = provenance("converge", payload)
    header.update({"N_ref": body["N_ref"], "tau": body["tau"]})
    table = {"N": [int(n) for n, _ in body["rows"]],
             "L2_sq_diff": [d for _, d in body["rows"]]}
    stem = ns["stem"] or "convergence"
    artifacts = save_table(outdir, stem, table, header)
    for n, d in body["rows"]:
        print(f"N={int(n):>3}  L2^2={d:.6e}")
    return artifacts


def _cmd_figure(ns: dict, client: ServiceClient, outdir: Path) -> list[Path]:
    raw = ns["set"]
    pairs = [raw] if isinstance(raw, tuple) else (raw or [])
    overrides = dict(pairs)
    body = _call(client, f"/figure/{ns['k']}", {"overrides": overrides})
    prov = provenance("figure", {"k": ns["k"], "overrides": overrides})
    stem = ns["stem"] or "fig"
    artifacts = []
    for name, columns in body["tables"].items():
        header = dict(prov)
        header["figure"] = body["figure"]
        header["table"] = name
        artifacts += save_table(outdir, f"{stem}{ns['k']}_{name}",
                                columns, header)
    summary = dict(prov)
    summary["figure"] = body["figure"]
    summary["summary"] = body["summary"]
    artifacts.append(write_json(outdir / f"{stem}{ns['k']}_summary.json",
                                summary))
    print(f"figure {ns['k']}: tables {sorted(body['tables'])}")
    return artifacts


_COMMON = [
    Opt("--outdir", str, None, "output directory (default $WORMYM_OUTDIR or .)"),
    Opt("--server", str, None, "service URL (default: run in-process)"),
    Opt("--config", str, None, f"key=value defaults file (default ./{CONFIG_NAME})"),
    Opt("--stem", str, None, "artifact name stem override"),
]

_COMMANDS: dict[str, tuple[list[Opt], Callable, str]] = {
    "static": ([
        Opt("--ell", float, None, "angular momentum parameter", required=True),
        Opt("--n", int, None, "zero count of the single profile to solve"),
        Opt("--all", None, False, "enumerate the whole catalogue (default)"),
        Opt("--r-max", float, 25.0, "half-width of the radial grid"),
        Opt("--points", int, 401, "rows in the sampled profile table"),
    ], _cmd_static, "solve static profiles and write the energy table"),
    "spectrum": ([
        Opt("--ell", float, None, "angular momentum parameter", required=True),
        Opt("--bg", str, "star", "background: star, ground, or wN"),
        Opt("--M", int, 40, "pencil truncation order"),
        Opt("--j-max", int, 24, "closed-form mode depth for comparison"),
    ], _cmd_spectrum, "linear mode spectrum of a static background"),
    "evolve": ([
        Opt("--ell", float, None, "angular momentum parameter", required=True),
        Opt("--data", _parse_data, None, "initial data n:value,...",
            required=True, metavar="MAP"),
        Opt("--data-dot", _parse_data, {}, "initial velocity n:value,...",
            metavar="MAP"),
        Opt("--N", int, 40, "Galerkin truncation"),
        Opt("--tau-end", float, 60.0, "final time"),
        Opt("--stride", float, 0.05, "recording stride"),
        Opt("--rtol", float, 1e-10, "integrator relative tolerance"),
        Opt("--atol", float, 1e-12, "integrator absolute tolerance"),
        Opt("--stepper", str, "adaptive", "adaptive or fixed"),
        Opt("--dt", float, None, "fixed-stepper time step"),
        Opt("--obs-x", _parse_floats, [], "field sample points x,...",
            metavar="XS"),
        Opt("--bg", str, None, "linearize about this background"),
    ], _cmd_evolve, "integrate the coefficient system and write the trajectory"),
    "bisect": ([
        Opt("--ell", float, None, "angular momentum parameter", required=True),
        Opt("--family", str, "even-c", "label of the tuned family"),
        Opt("--base", _parse_data, {0: -1.0}, "untuned coefficients n:value,...",
            metavar="MAP"),
        Opt("--index", int, 2, "coefficient carrying the tuning amplitude"),
        Opt("--c-lo", float, 0.2, "lower end of the bracket"),
        Opt("--c-hi", float, 1.0, "upper end of the bracket"),
        Opt("--digits", int, 14, "bracket width: 10^-digits"),
        Opt("--N", int, 32, "Galerkin truncation"),
    ], _cmd_bisect, "bisect a tuned family to the critical amplitude"),
    "converge": ([
        Opt("--ell", float, None, "angular momentum parameter", required=True),
        Opt("--data", _parse_data, None, "initial data n:value,...",
            required=True, metavar="MAP"),
        Opt("--N", _parse_ints, None, "truncations N,... (largest is the "
            "reference unless --N-ref is given)", required=True,
            metavar="LIST"),
        Opt("--N-ref", int, None, "reference truncation"),
        Opt("--tau", float, 1.0, "comparison time"),
    ], _cmd_converge, "squared L2 differences against a reference truncation"),
    "figure": ([
        Opt("k", int, None, "figure id, 1..11"),
        Opt("--set", _parse_override, None, "pipeline override key=value"),
    ], _cmd_figure, "run one canonical figure pipeline"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wormym",
        description="Equivariant wave maps on a wormhole: statics, spectra, "
                    "evolution.")
    parser.add_argument("--version", action="version",
                        version=f"wormym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts, _, help_text) in _COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        for opt in opts + _COMMON:
            if opt.flag == "--set":
                cmd.add_argument("--set", dest="set", metavar="KEY=VALUE",
                                 type=_parse_override, action="append",
                                 default=argparse.SUPPRESS,
                                 help=opt.help)
            else:
                opt.add_to(cmd)
    serve = sub.add_parser("serve", help="run the service over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    ns = parser.parse_args(argv)

    if ns.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=ns.host, port=ns.port)
        return 0

    opts, handler, _ = _COMMANDS[ns.command]
    config_path = getattr(ns, "config", None)
    config: dict[str, str] = {}
    path = Path(config_path) if config_path else Path(CONFIG_NAME)
    if config_path or path.is_file():
        try:
            config = load_config(path)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    merged = _merge(opts + _COMMON, ns, config, parser.error)

    client = ServiceClient(merged["server"])
    outdir = resolve_outdir(merged["outdir"])
    artifacts = handler(merged, client, outdir)
    log_run(outdir, "wormym " + " ".join(shlex.quote(a) for a in argv),
            artifacts)
    for path in artifacts:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
