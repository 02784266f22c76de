"""Quantitative asymptotics of trajectories.

Three fit models cover everything the flow produces: plain exponential decay
toward a stable direction, exponentially damped sinusoids (quasinormal
ringdown), and the power-law decay that replaces the exponential at integer
coupling thresholds.  Power-law asymptotics are fitted against
A (tau + tau0)^s rather than a bare power: a trajectory reaches the
power-law regime with its own time origin (the transit time of the
nonlinear transient), and over any finite window the unshifted line
misestimates the exponent by far more than the integrator error.  The shift
is a fitted nuisance parameter that vanishes on synthetic data.

Endstate classification measures L2([-1,1]) distances of the final recorded
field against a catalogue of static solutions, both signs included.
Critical-surface bisection drives a one-parameter family of initial data to
the sign boundary of the vacuum endstate; near the critical value the
trajectory hovers at an intermediate unstable attractor, and the hovering
lifetime grows like -(1/gamma) ln|c - c_*| with gamma the attractor's
unstable rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    BracketFailureError,
    DomainError,
    InsufficientDataError,
    InsufficientOscillationError,
    NotSeparatingFamilyError,
    PreconditionError,
    ScalingUndefinedError,
)
from .evolution import EvolConfig, Trajectory, evolve
from .galerkin import ChebSeries, EvolState
from .params import PhysParams
from .spectra import pencil_spectrum
from .statics import (StaticProfile, find_static, saddle_profile,
                      static_energy, vacuum_profile)

MIN_FIT_SAMPLES = 10
LATE_TIME_FLOOR = 50.0        # power-law fits belong to the late regime
MAX_BISECT_HALVINGS = 48      # ~14.5 digits; deeper is noise in doubles
LIFETIME_DELTA = 0.05         # L2 radius defining "time spent at" an attractor
COMMIT_RADIUS = 0.3           # coefficient ball around a vacuum = committed
PROBE_CHUNK = 40.0
PROBE_HORIZON = 400.0


@dataclass(frozen=True)
class FitResult:
    """One fitted asymptotic model over a window.

    rate holds the decay rate for exponential/ringdown models and the
    exponent for the power law; residual is the RMS misfit of the model in
    linear space, relative to the RMS of the data over the window.  Rates
    from fits with residual above ~0.05 should not be trusted.
    """

    model: str
    rate: float
    frequency: float | None
    amplitude: float
    phase: float | None
    window: tuple[float, float]
    residual: float


def _window_mask(tau: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    if not hi > lo:
        raise PreconditionError("fit window must have positive length")
    return (tau >= lo) & (tau <= hi)


def _relative_rms(y: np.ndarray, model: np.ndarray) -> float:
    scale = math.sqrt(float(np.mean(y ** 2)))
    if scale == 0.0:
        return 0.0
    return math.sqrt(float(np.mean((y - model) ** 2))) / scale


def fit_exponential(tau: np.ndarray, y: np.ndarray,
                    window: tuple[float, float]) -> FitResult:
    """Least-squares line on (tau, log y); rate is minus the slope.

    y must be positive on the window (pass |y| for signed channels); exact
    zeros are dropped before taking logs.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    m = _window_mask(tau, window)
    if np.any(y[m] < 0.0):
        raise DomainError("exponential fit needs positive data; pass |y|")
    m &= y > 0.0
    if int(np.sum(m)) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_SAMPLES} samples in the fit window")
    slope, icept = np.polyfit(tau[m], np.log(y[m]), 1)
    amp = math.exp(icept)
    resid = _relative_rms(y[m], amp * np.exp(slope * tau[m]))
    return FitResult("exponential", -float(slope), None, amp, None,
                     (float(window[0]), float(window[1])), resid)


def fit_powerlaw(tau: np.ndarray, y: np.ndarray, window: tuple[float, float],
                 late_time: float = LATE_TIME_FLOOR) -> FitResult:
    """Fit |y| ~ A (tau + tau0)^s on a late-time window; rate holds s.

    The time shift absorbs the transient's transit time; it is seeded at
    zero, so exact power-law data reproduce the plain log-log line.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    if window[0] < late_time:
        raise PreconditionError(
            f"power-law windows start at tau >= {late_time}")
    m = _window_mask(tau, window) & (np.abs(y) > 0.0)
    if int(np.sum(m)) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_SAMPLES} samples in the fit window")
    t, z = tau[m], np.log(np.abs(y[m]))
    s0, c0 = np.polyfit(np.log(t), z, 1)

    def misfit(p):
        return p[1] + p[0] * np.log(t + p[2]) - z

    lo = -0.9 * float(t[0])
    sol = least_squares(misfit, (s0, c0, 0.0),
                        bounds=((-np.inf, -np.inf, lo), (np.inf, np.inf, np.inf)))
    s, c, shift = sol.x
    model = np.exp(c) * (t + shift) ** s
    resid = _relative_rms(np.abs(y[m]), model)
    return FitResult("powerlaw", float(s), None, math.exp(c), None,
                     (float(window[0]), float(window[1])), resid)


def _unfold(z: np.ndarray) -> np.ndarray:
    """Restore alternating signs to a folded |oscillation| signal."""
    if np.any(z < 0.0):
        return z
    out = z.copy()
    interior = (z[1:-1] <= z[:-2]) & (z[1:-1] <= z[2:])
    dips = np.flatnonzero(interior & (z[1:-1] < 0.2 * np.max(z))) + 1
    sign = 1.0
    start = 0
    for d in dips:
        out[start:d + 1] *= sign
        sign = -sign
        start = d + 1
    out[start:] *= sign
    return out


def fit_ringdown(tau: np.ndarray, y: np.ndarray,
                 window: tuple[float, float]) -> FitResult:
    """Fit A e^{-gamma tau} sin(omega tau + delta) to an oscillating channel.

    The envelope of successive extrema seeds gamma and the extremum spacing
    seeds omega (= pi / mean spacing); all four parameters are then refined
    by nonlinear least squares.  Folded signals (|W - W_bg| style channels)
    are unfolded by flipping sign at the near-zero dips first.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    m = _window_mask(tau, window)
    t = tau[m]
    z = _unfold(y[m])
    signs = np.sign(z[np.abs(z) > 0.0])
    flips = int(np.sum(signs[1:] != signs[:-1]))
    if flips < 4:
        raise InsufficientOscillationError(
            f"ringdown fit needs >= 4 sign changes in the window, got {flips}")
    a = np.abs(z)
    peak = np.flatnonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:])) + 1
    peak = peak[a[peak] > 0.0]
    if len(peak) < 3:
        raise InsufficientOscillationError("too few extrema for an envelope")
    gamma0, logA0 = np.polyfit(t[peak], np.log(a[peak]), 1)
    gamma0 = -gamma0
    omega0 = math.pi / float(np.mean(np.diff(t[peak])))

    def misfit(p):
        A, g, w, d = p
        # clipped exponent keeps wild exploratory steps finite
        return A * np.exp(np.clip(-g * t, -700.0, 50.0)) * np.sin(w * t + d) - z

    best = None
    for d0 in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        sol = least_squares(misfit, (math.exp(logA0), gamma0, omega0, d0))
        if best is None or sol.cost < best.cost:
            best = sol
    A, g, w, d = best.x
    if A < 0.0:
        A, d = -A, d + math.pi
    if w < 0.0:
        w, d = -w, d + math.pi
    d = math.remainder(d, 2.0 * math.pi)
    resid = _relative_rms(z, A * np.exp(-g * t) * np.sin(w * t + d))
    return FitResult("ringdown", float(g), float(w), float(A), float(d),
                     (float(window[0]), float(window[1])), resid)


# ---------------------------------------------------------------------------
# endstate classification

class Endstate(NamedTuple):
    label: str
    distance: float
    profile: StaticProfile | None


def classify_endstate(trajectory: Trajectory, statics: list[StaticProfile],
                      tol: float) -> Endstate:
    """Nearest static solution (either sign) to the final recorded state.

    Returns the minimizing candidate with its L2 distance, or the label
    'undecided' when nothing comes within tol.
    """
    if not statics:
        raise PreconditionError("empty static catalogue")
    best_label, best_dist, best_prof = "undecided", math.inf, None
    for prof in statics:
        candidates = (prof,) if prof.kind == "saddle" else (prof, -prof)
        for cand in candidates:
            dist = float(trajectory.distance_to(cand)[-1])
            if dist < best_dist:
                best_label, best_dist, best_prof = cand.label, dist, cand
    if best_dist > tol:
        return Endstate("undecided", best_dist, None)
    return Endstate(best_label, best_dist, best_prof)


# ---------------------------------------------------------------------------
# critical-surface bisection

@dataclass(frozen=True)
class CriticalResult:
    """Outcome of a critical-parameter search on one family."""

    family: str
    params: PhysParams
    c_lo: float
    c_hi: float
    attractor: str
    attractor_distance: float
    lifetimes: tuple[tuple[float, float], ...]

    @property
    def c_star(self) -> float:
        return 0.5 * (self.c_lo + self.c_hi)


def tuned_family(params: PhysParams, N: int, base: dict[int, float],
                 index: int) -> Callable[[float], EvolState]:
    """c |-> initial state with coefficient map base plus {index: c}."""

    def family(c: float) -> EvolState:
        entries = dict(base)
        entries[index] = c
        return EvolState(ChebSeries.from_map(entries, N), ChebSeries.zeros(N),
                         0.0, params)

    return family


def _commitment(initial: EvolState, pair: tuple[StaticProfile, StaticProfile],
                e_floor: float, config_N: int, rtol: float,
                atol: float) -> tuple[float, float, Trajectory]:
    """Evolve until the state commits to one of two stable endstates.

    Committed means L2 distance below COMMIT_RADIUS to one of the pair
    while the energy sits below e_floor, the minimum energy of any unstable
    static in the sector.  Basin boundaries consist of states flowing to
    unstable statics, whose monotone energy therefore never drops below
    e_floor; a low-energy state near an endstate is strictly inside its
    basin, so first entry decides the sign for good.  Returns
    (sign, commitment time, last integration leg); +1 means pair[0].
    """
    state = initial
    elapsed = 0.0
    while elapsed < PROBE_HORIZON:
        cfg = EvolConfig(N=config_N, tau_end=PROBE_CHUNK, stride=0.05,
                         rtol=rtol, atol=atol)
        leg = evolve(state, cfg)
        settled = leg.energy < e_floor
        plus = settled & (leg.distance_to(pair[0]) < COMMIT_RADIUS)
        minus = settled & (leg.distance_to(pair[1]) < COMMIT_RADIUS)
        hit = np.flatnonzero(plus | minus)
        if len(hit):
            k = hit[0]
            sign = 1.0 if plus[k] else -1.0
            return sign, elapsed + float(leg.times[k]), leg
        state = leg.final_state
        elapsed += float(leg.times[-1])
    raise BracketFailureError(
        f"no endstate commitment within tau = {PROBE_HORIZON}")


def _family_parity(state: EvolState) -> str:
    even, odd = state.a.parity_mass()
    if odd == 0.0 and even > 0.0:
        return "even"
    if even == 0.0 and odd > 0.0:
        return "odd"
    return "mixed"


def _intermediate_candidates(params: PhysParams, parity: str
                             ) -> list[StaticProfile]:
    cands = [saddle_profile(params)]
    wanted = {"even": (2,), "odd": (3,), "mixed": (1, 2, 3)}[parity]
    for n in wanted:
        if n < params.ell:
            cands.append(find_static(params, n))
    return cands


def _endstate_pair(params: PhysParams, parity: str
                   ) -> tuple[StaticProfile, StaticProfile]:
    """The two stable endstates a family of the given parity can reach."""
    if parity == "odd":
        if params.ell <= 1.0:
            raise PreconditionError(
                "the odd sector below ell = 1 has a single endstate; "
                "no sign boundary to bisect")
        w1 = find_static(params, 1)
        return w1, -w1
    w0 = vacuum_profile(params)
    return w0, -w0


def _energy_floor(candidates: list[StaticProfile]) -> float:
    return (1.0 - 1e-6) * min(static_energy(c) for c in candidates)


def bisect_critical(family: Callable[[float], EvolState], params: PhysParams,
                    c_range: tuple[float, float], digits: int,
                    family_label: str = "tuned family",
                    rtol: float = 1e-10, atol: float = 1e-12
                    ) -> CriticalResult:
    """Bisect a one-parameter family to the vacuum-sign boundary.

    Each probe integrates until a_0 commits to a vacuum sign; the bracket
    shrinks to the requested digits (capped at 48 halvings, the resolution
    of doubles).  The final midpoint run is then classified against the
    intermediate attractor candidates of the family's parity sector, and
    every probe's (c, commitment time) pair is kept: those times already
    display the logarithmic lifetime growth.
    """
    c_lo, c_hi = float(c_range[0]), float(c_range[1])
    if not c_hi > c_lo:
        raise PreconditionError("need c_hi > c_lo")
    if digits < 1:
        raise PreconditionError("need at least one digit")
    N = family(c_lo).N
    parity = _family_parity(family(0.5 * (c_lo + c_hi)))
    candidates = _intermediate_candidates(params, parity)
    pair = _endstate_pair(params, parity)
    e_floor = _energy_floor(candidates)
    sign_lo, t_lo, _ = _commitment(family(c_lo), pair, e_floor, N, rtol, atol)
    sign_hi, t_hi, _ = _commitment(family(c_hi), pair, e_floor, N, rtol, atol)
    if sign_lo == sign_hi:
        raise NotSeparatingFamilyError(
            f"both endpoints relax to {pair[0 if sign_lo > 0 else 1].label}")
    lifetimes = [(c_lo, t_lo), (c_hi, t_hi)]
    width_goal = 10.0 ** (-digits)
    halvings = 0
    while (c_hi - c_lo) > width_goal and halvings < MAX_BISECT_HALVINGS:
        mid = 0.5 * (c_lo + c_hi)
        sign_mid, t_mid, _ = _commitment(family(mid), pair, e_floor, N,
                                         rtol, atol)
        lifetimes.append((mid, t_mid))
        if sign_mid == sign_lo:
            c_lo = mid
        else:
            c_hi = mid
        halvings += 1
    mid = 0.5 * (c_lo + c_hi)
    _, t_mid, leg = _commitment(family(mid), pair, e_floor, N, rtol, atol)
    # the commitment leg already covers the hover unless it spilled chunks
    probe = leg if t_mid + 5.0 <= float(leg.times[-1]) else evolve(
        family(mid), EvolConfig(N=N, tau_end=t_mid + 10.0, stride=0.05,
                                rtol=rtol, atol=atol))
    label, dist = "undecided", math.inf
    for cand in candidates:
        options = (cand,) if cand.kind == "saddle" else (cand, -cand)
        for opt in options:
            d = float(np.min(probe.distance_to(opt)[probe.times >= 3.0]))
            if d < dist:
                label, dist = opt.label, d
    return CriticalResult(family_label, params, c_lo, c_hi, label, dist,
                          tuple(lifetimes))


class ScalingResult(NamedTuple):
    slope: float
    predicted: float
    samples: tuple[tuple[float, float], ...]


def _fit_lifetime_slope(offsets: np.ndarray, lifetimes: np.ndarray) -> float:
    return float(np.polyfit(-np.log(np.abs(offsets)), lifetimes, 1)[0])


def _unstable_rate(params: PhysParams, attractor: StaticProfile,
                   parity: str) -> float:
    if attractor.kind == "saddle":
        return params.ell
    modes = pencil_spectrum(attractor, M=40)
    rates = [m.lam.real for m in modes
             if m.is_unstable and abs(m.lam.imag) == 0.0
             and (parity == "mixed" or m.parity == parity)]
    if not rates:
        raise ScalingUndefinedError(
            f"no unstable {parity} rate on {attractor.label}")
    return max(rates)


def lifetime_scaling(family: Callable[[float], EvolState],
                     params: PhysParams, c_star: float,
                     offsets: list[float], delta: float = LIFETIME_DELTA,
                     rtol: float = 1e-10, atol: float = 1e-12
                     ) -> ScalingResult:
    """Slope of lifetime vs -ln|c - c_*| against the predicted 1/gamma.

    Lifetime is the span of recorded times whose state sits within L2
    distance delta of the intermediate attractor.  The attractor is
    identified on the first (deepest) offset's trajectory from the family's
    parity candidates, and the prediction uses its unstable rate in the
    family's parity sector (the saddle's rate is ell itself).
    """
    offs = np.asarray(sorted(offsets, key=abs), dtype=float)
    if len(offs) < 3:
        raise PreconditionError("need at least three offsets")
    if np.any(offs == 0.0):
        raise PreconditionError("offsets must be nonzero")
    if np.max(np.abs(offs)) < 999.0 * np.min(np.abs(offs)):
        raise PreconditionError("offsets must span three decades")
    N = family(c_star).N
    parity = _family_parity(family(c_star + offs[0]))
    candidates = _intermediate_candidates(params, parity)
    pair = _endstate_pair(params, parity)
    e_floor = _energy_floor(candidates)
    attractor = None
    samples = []
    for off in offs:
        initial = family(c_star + off)
        _, t_commit, leg = _commitment(initial, pair, e_floor, N, rtol, atol)
        traj = leg if t_commit + 5.0 <= float(leg.times[-1]) else evolve(
            initial, EvolConfig(N=N, tau_end=t_commit + 10.0, stride=0.05,
                                rtol=rtol, atol=atol))
        if attractor is None:
            best = math.inf
            for cand in candidates:
                options = (cand,) if cand.kind == "saddle" else (cand, -cand)
                for opt in options:
                    d = float(np.min(traj.distance_to(opt)[traj.times >= 3.0]))
                    if d < best:
                        best, attractor = d, opt
            if best > delta:
                raise ScalingUndefinedError(
                    "no intermediate attractor approached within delta")
        dist = traj.distance_to(attractor)
        inside = np.flatnonzero(dist < delta)
        if len(inside) == 0:
            raise ScalingUndefinedError(
                f"offset {off:g} never enters the delta-neighborhood")
        lifetime = float(traj.times[inside[-1]] - traj.times[inside[0]])
        samples.append((float(off), lifetime))
    slope = _fit_lifetime_slope(np.array([s[0] for s in samples]),
                                np.array([s[1] for s in samples]))
    gamma = _unstable_rate(params, attractor, parity)
    return ScalingResult(slope, 1.0 / gamma, tuple(samples))


# ---------------------------------------------------------------------------
# truncation convergence

def convergence_table(entries: dict[int, float], params: PhysParams,
                      N_list: list[int], N_ref: int = 50, tau: float = 1.0,
                      rtol: float = 1e-10, atol: float = 1e-12
                      ) -> list[tuple[int, float]]:
    """Squared L2 difference at time tau between each order and a reference.

    The same coefficient-map initial data are evolved at every order in
    N_list and against N_ref; each row is (N, ||W_N - W_ref||^2) evaluated
    by Gauss quadrature at the reference resolution.
    """
    if any(N >= N_ref for N in N_list):
        raise PreconditionError("every N must sit below the reference order")

    def run(N: int) -> Trajectory:
        state = EvolState(ChebSeries.from_map(entries, N), ChebSeries.zeros(N),
                          0.0, params)
        return evolve(state, EvolConfig(N=N, tau_end=tau, stride=tau,
                                        rtol=rtol, atol=atol))

    ref = run(N_ref)
    xq = np.polynomial.legendre.leggauss(2 * N_ref + 8)
    nodes, weights = xq
    ref_vals = np.polynomial.chebyshev.chebval(nodes, ref.coeffs[-1])
    rows = []
    for N in N_list:
        vals = np.polynomial.chebyshev.chebval(nodes, run(N).coeffs[-1])
        rows.append((N, float(weights @ (vals - ref_vals) ** 2)))
    return rows
