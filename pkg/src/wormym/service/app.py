"""HTTP facade over the numerical core.

Every endpoint is a stateless wrapper: validate the request model, call
the corresponding module function, shape the result into the response
model.  Typed domain errors map onto status codes (precondition violations
to 400, numerical failures to 500) so clients can distinguish "you asked
for something outside the contract" from "the computation broke".
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import (bisect_critical, convergence_table, fit_exponential,
                        fit_powerlaw, fit_ringdown, lifetime_scaling,
                        tuned_family)
from ..errors import NumericalError, PreconditionError
from ..evolution import (EvolConfig, Trajectory, energy_balance_residual,
                         evolve, linearized_evolve)
from ..figures import figure_data
from ..galerkin import ChebSeries, EvolState
from ..params import PhysParams
from ..serialize import profile_columns, profile_summary
from ..spectra import closed_spectrum, pencil_spectrum
from ..statics import (StaticProfile, enumerate_statics, find_static,
                       saddle_profile, to_cheb, vacuum_profile)
from .schemas import (BisectRequest, BisectResponse, CatalogueResponse,
                      ConvergeRequest, ConvergeResponse, EvolveRequest,
                      FigureRequest, FigureResponse, FitRequest, FitResponse,
                      LifetimeRequest, LifetimeResponse, ModePayload,
                      ProfileResponse, ProfileSummary, SpectrumRequest,
                      SpectrumResponse, StaticEnumerateRequest,
                      StaticSolveRequest, TrajectoryResponse)

_CLOSED_NAMES = {"star": "star", "saddle": "star",
                 "ground": "ground", "vacuum": "ground", "w0": "ground"}

# Closed-form eigenvalues repeat once the two branches cross (the double
# roots are defective in the companion form, so the resolution filter
# rightly refuses to certify them); the headline gap is taken over the
# leading simple modes only, which cover every instability and every
# fundamental ringdown frequency.
_LEADING_CLOSED = 6


def _resolve_background(name: str, params: PhysParams,
                        r_max: float = 25.0) -> StaticProfile:
    key = name.lower()
    if key in ("star", "saddle", "wstar", "w*"):
        return saddle_profile(params, r_max)
    if key in ("ground", "vacuum", "w0"):
        return vacuum_profile(params, r_max)
    if key.startswith("w") and key[1:].isdigit():
        return find_static(params, int(key[1:]), r_max)
    raise PreconditionError(
        f"unknown background '{name}'; use star, ground, or wN")


def _background_series(profile: StaticProfile, N: int) -> ChebSeries:
    if profile.is_constant:
        return ChebSeries.from_map({0: profile.w_inf}, N=N)
    return to_cheb(profile, N)


def _profile_response(profile: StaticProfile, n_points: int
                      ) -> ProfileResponse:
    cols = profile_columns(profile, n_points)
    return ProfileResponse(
        summary=ProfileSummary(**profile_summary(profile)),
        table={k: np.asarray(v).tolist() for k, v in cols.items()})


def _mode_payload(mode) -> ModePayload:
    return ModePayload(re=mode.lam.real, im=mode.lam.imag,
                       parity=mode.parity, source=mode.source)


def _trajectory_response(traj: Trajectory) -> TrajectoryResponse:
    observables = {f"W({x:g})": traj.field_at(float(x)).tolist()
                   for x in traj.config.obs_x}
    flux = None if traj.flux_integral is None \
        else np.asarray(traj.flux_integral).tolist()
    return TrajectoryResponse(
        times=traj.times.tolist(),
        coeffs=traj.coeffs.tolist(),
        coeffs_dot=traj.coeffs_dot.tolist(),
        flux_integral=flux,
        linear=traj.linear,
        energy=None if traj.linear else traj.energy.tolist(),
        balance_residual=None if traj.linear
        else energy_balance_residual(traj),
        final_state={
            "tau": traj.final_state.tau,
            "a": traj.final_state.a.coeffs.tolist(),
            "a_dot": traj.final_state.a_dot.coeffs.tolist(),
            "ell": traj.params.ell,
        },
        observables=observables)


def create_app() -> FastAPI:
    app = FastAPI(title="wormym", version=__version__)

    @app.exception_handler(PreconditionError)
    async def _precondition(request: Request, exc: PreconditionError):
        return JSONResponse(status_code=400, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.exception_handler(NumericalError)
    async def _numerical(request: Request, exc: NumericalError):
        return JSONResponse(status_code=500, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "package": "wormym", "version": __version__}

    @app.post("/static/solve", response_model=ProfileResponse)
    def static_solve(req: StaticSolveRequest):
        params = PhysParams(ell=req.ell)
        profile = find_static(params, req.n, req.r_max)
        return _profile_response(profile, req.n_points)

    @app.post("/static/enumerate", response_model=CatalogueResponse)
    def static_enumerate(req: StaticEnumerateRequest):
        params = PhysParams(ell=req.ell)
        catalogue = enumerate_statics(params, req.r_max)
        return CatalogueResponse(
            ell=req.ell, count=len(catalogue),
            profiles=[_profile_response(p, req.n_points) for p in catalogue])

    @app.post("/spectrum", response_model=SpectrumResponse)
    def spectrum(req: SpectrumRequest):
        params = PhysParams(ell=req.ell)
        profile = _resolve_background(req.background, params)
        modes = pencil_spectrum(profile, M=req.M)
        closed = None
        gap = None
        closed_name = _CLOSED_NAMES.get(req.background.lower())
        if closed_name is not None:
            closed = closed_spectrum(closed_name, params, req.j_max)
            closed = sorted(closed, key=lambda m: (-m.lam.real, m.lam.imag))
            pencil_vals = modes.eigenvalues()
            gap = max(float(np.min(np.abs(pencil_vals - m.lam)))
                      for m in closed[:_LEADING_CLOSED])
        return SpectrumResponse(
            background=modes.background, ell=req.ell,
            unstable_count=modes.unstable_count,
            modes=[_mode_payload(m) for m in modes],
            closed_form=None if closed is None
            else [_mode_payload(m) for m in closed],
            max_closed_form_gap=gap)

    @app.post("/evolve", response_model=TrajectoryResponse)
    def evolve_endpoint(req: EvolveRequest):
        params = PhysParams(ell=req.ell)
        state = EvolState(ChebSeries.from_map(req.data, req.N),
                          ChebSeries.from_map(req.data_dot, req.N),
                          0.0, params)
        config = EvolConfig(N=req.N, tau_end=req.tau_end, rtol=req.rtol,
                            atol=req.atol, stride=req.stride,
                            obs_x=tuple(req.obs_x), stepper=req.stepper,
                            dt=req.dt)
        if req.background is None:
            traj = evolve(state, config)
        else:
            profile = _resolve_background(req.background, params)
            traj = linearized_evolve(_background_series(profile, req.N),
                                     state, config)
        return _trajectory_response(traj)

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest):
        tau = np.asarray(req.tau)
        y = np.asarray(req.y)
        fitter = {"exponential": fit_exponential, "ringdown": fit_ringdown,
                  "powerlaw": fit_powerlaw}[req.model]
        result = fitter(tau, y, req.window)
        return FitResponse(model=result.model, rate=result.rate,
                           frequency=result.frequency,
                           amplitude=result.amplitude, phase=result.phase,
                           window=result.window, residual=result.residual)

    @app.post("/bisect", response_model=BisectResponse)
    def bisect(req: BisectRequest):
        params = PhysParams(ell=req.ell)
        family = tuned_family(params, req.N, req.base, req.index)
        result = bisect_critical(family, params, req.c_range, req.digits,
                                 family_label=req.family)
        return BisectResponse(
            family=result.family, ell=req.ell, c_lo=result.c_lo,
            c_hi=result.c_hi, c_star=result.c_star,
            attractor=result.attractor,
            attractor_distance=result.attractor_distance,
            lifetimes=list(result.lifetimes))

    @app.post("/lifetimes", response_model=LifetimeResponse)
    def lifetimes(req: LifetimeRequest):
        params = PhysParams(ell=req.ell)
        family = tuned_family(params, req.N, req.base, req.index)
        result = lifetime_scaling(family, params, req.c_star, req.offsets,
                                  req.delta)
        return LifetimeResponse(slope=result.slope,
                                predicted=result.predicted,
                                samples=list(result.samples))

    @app.post("/converge", response_model=ConvergeResponse)
    def converge(req: ConvergeRequest):
        params = PhysParams(ell=req.ell)
        rows = convergence_table(req.data, params, req.N_list, req.N_ref,
                                 req.tau)
        return ConvergeResponse(rows=rows, N_ref=req.N_ref, tau=req.tau)

    @app.post("/figure/{k}", response_model=FigureResponse)
    def figure(k: int, req: FigureRequest):
        bundle = figure_data(k, **req.overrides)
        tables = {name: {col: np.asarray(vals).tolist()
                         for col, vals in cols.items()}
                  for name, cols in bundle.tables.items()}
        return FigureResponse(figure=bundle.figure, tables=tables,
                              summary=bundle.summary)

    return app


app = create_app()
