"""Static solutions by shooting from the neck.

Static fields satisfy W'' + l(l+1) sech^2(r) W (1 - W^2) = 0.  Solutions that
stay inside the strip |W| < 1 for all r approach finite limits W(+-inf) with
|W_inf| < 1, the corrections falling off like exp(-2|r|).  Besides the
constants W = 1 (vacuum, and its negative) and W = 0, there is exactly one
reflection-symmetric-or-antisymmetric solution W_n with n zeros for every
integer 1 <= n < l when l is not an integer; odd n gives odd W_n (shooting
parameter b = W'(0)), even n gives even W_n (shooting parameter s = W(0)).

The weighted phase-plane functional

    Q = cosh^2(r) W'^2 - (l(l+1)/2) (1 - W^2)^2

is nondecreasing in r > 0 along any solution, which makes the shooting
structure monotone: increasing the shooting parameter strictly removes zeros.
The solver scores each shot by its zero count plus a penalty when a run that
is still confined at r_max is heading toward one more crossing (sign of W'
opposed to the sign of W); the score is a nonincreasing step function of the
shooting parameter and the n-zero solution sits exactly on the step between
scores n//2 and n//2 + 1, so plain bisection is sharp.  Integration halts
early whenever |W| crosses 1: such runs can never return to the strip.

Bisection alone cannot deliver tail-accurate profiles: perturbations around
W_n grow like exp(int sqrt(l(l+1)(3 W^2 - 1)) sech), so a double precision
shot is thrown off the solution well before r_max no matter how tightly the
shooting parameter is bracketed.  The bracket therefore only seeds a
collocation solve on [0, R] whose outer boundary condition sits on the
decaying tail manifold W = W_inf + B exp(-2r) + C exp(-4r) + ..., with B and
C forced by the field equation and the limit W_inf a free parameter of the
solve.  At moderate coupling the profile is then resampled as a single
inward integration launched on the tail manifold at r_max, with W_inf
re-tuned so the run lands exactly on the parity condition at r = 0: inward
runs are stable, and sampling one smooth trajectory keeps finite-difference
residuals of the stored samples at the discretization floor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.integrate import simpson, solve_bvp, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    BracketFailureError,
    EnergyInconsistencyError,
    NoSuchSolutionError,
    PreconditionError,
)
from .galerkin import ChebSeries, warn_if_underresolved
from .params import PhysParams

DEFAULT_R_MAX = 25.0
SHOOT_RTOL = 1e-10
SHOOT_ATOL = 1e-12
FLOW_RTOL = 1e-13
FLOW_ATOL = 1e-15
PROFILE_STEP = 0.005
BRACKET_WIDTH = 1e-13
MAX_BISECT = 400
R_COLLOCATION = 14.0
BVP_TOL = 1e-10
BVP_MAX_NODES = 100_000
# the inward resampling is well conditioned while atol * exp(pi sqrt(lam/2))
# stays far below the field scale; above this coupling the collocation
# interpolant itself is stored
INWARD_SAFE_COUPLING = 100.0

Parity = Literal["even", "odd"]


class ShotSamples(NamedTuple):
    r: np.ndarray
    w: np.ndarray
    wprime: np.ndarray


@dataclass(frozen=True)
class ShotOutcome:
    """Result of a single outward shot.

    classification is one of 'crossed_plus_one', 'crossed_minus_one',
    'confined'; exit_radius is None for confined runs.  zero_count counts
    strict sign changes of W on r > 0.
    """

    classification: str
    zero_count: int
    extrema_count: int
    exit_radius: float | None


def _field_ode(lam: float):
    def fun(r, y):
        sech2 = 1.0 / np.cosh(r) ** 2
        return (y[1], -lam * sech2 * y[0] * (1.0 - y[0] ** 2))

    return fun


def _initial_state(parity: Parity, shoot: float) -> tuple[float, float]:
    if parity == "odd":
        return 0.0, shoot
    if parity == "even":
        return shoot, 0.0
    raise PreconditionError(f"parity must be 'even' or 'odd', got {parity!r}")


def _count_sign_changes(values: np.ndarray) -> int:
    signs = np.sign(values)
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def _count_zeros(sol, r_lo: float, r_hi: float, n_samples: int) -> int:
    """Sign changes of W on (r_lo, r_hi], refining near-zero interior minima.

    A sampled local minimum of |W| that sits close to zero without a sign
    change could hide a pair of crossings; such intervals are re-examined at
    midpoints via the dense solution before the count is accepted.
    """
    r = np.linspace(r_lo, r_hi, n_samples)
    w = sol(r)[0]
    scale = np.max(np.abs(w)) or 1.0
    # samples at the integration noise floor carry no sign information
    w = np.where(np.abs(w) > 1e-10 * scale, w, 0.0)
    count = _count_sign_changes(w)
    aw = np.abs(w)
    for i in range(1, len(w) - 1):
        if aw[i] < 1e-7 * scale and w[i - 1] * w[i + 1] > 0 and w[i] * w[i + 1] > 0:
            fine = sol(np.linspace(r[i - 1], r[i + 1], 64))[0]
            fine = np.where(np.abs(fine) > 1e-10 * scale, fine, 0.0)
            extra = _count_sign_changes(fine) - _count_sign_changes(w[i - 1:i + 2])
            count += max(extra, 0)
    return count


def integrate_static(
    params: PhysParams,
    parity: Parity,
    shoot: float,
    r_max: float = DEFAULT_R_MAX,
    rtol: float = SHOOT_RTOL,
    atol: float = SHOOT_ATOL,
) -> tuple[ShotOutcome, ShotSamples]:
    """Shoot outward from r = 0 and classify the run.

    Runs end early when |W| crosses 1 (classification 'crossed_plus_one' or
    'crossed_minus_one'); otherwise they are 'confined' to [0, r_max].
    """
    if r_max <= 0:
        raise PreconditionError("r_max must be positive")
    lam = params.coupling
    y0 = _initial_state(parity, shoot)

    def hit_up(r, y):
        return y[0] - 1.0

    def hit_down(r, y):
        return y[0] + 1.0

    hit_up.terminal = True
    hit_down.terminal = True
    sol = solve_ivp(
        _field_ode(lam),
        (0.0, r_max),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=(hit_up, hit_down),
        dense_output=True,
    )
    if sol.t_events[0].size:
        classification, exit_radius = "crossed_plus_one", float(sol.t_events[0][0])
    elif sol.t_events[1].size:
        classification, exit_radius = "crossed_minus_one", float(sol.t_events[1][0])
    else:
        classification, exit_radius = "confined", None
    r_end = exit_radius if exit_radius is not None else r_max

    n_samples = max(1601, int(24.0 * r_end * math.sqrt(max(lam, 1.0))))
    zeros = _count_zeros(sol.sol, 0.0, r_end, n_samples)
    r_grid = np.linspace(0.0, r_end, n_samples)
    w, wp = sol.sol(r_grid)
    extrema = _count_sign_changes(wp[1:] if parity == "even" else wp)
    outcome = ShotOutcome(classification, zeros, extrema, exit_radius)
    return outcome, ShotSamples(r_grid, w, wp)


def _shot_score(params, parity, shoot, r_max) -> int:
    """Zero count, plus one when a confined run is still heading inward."""
    outcome, samples = integrate_static(params, parity, shoot, r_max)
    score = outcome.zero_count
    if outcome.classification == "confined":
        w_end, wp_end = samples.w[-1], samples.wprime[-1]
        sigma = 1.0 if outcome.zero_count % 2 == 0 else -1.0
        heading_in = wp_end * sigma < 0 and w_end * sigma > 0
        if heading_in or w_end * sigma < 0:
            score += 1
    return score


@dataclass(frozen=True)
class StaticProfile:
    """A static solution sampled on a symmetric r-grid.

    kind is 'vacuum' (W = +-1), 'saddle' (W = 0), or 'excited' (W_n).  The
    integral diagnostics cover the whole line: energy (the
    (W'^2 + ...)/2 quadrature), energy_quartic (the equivalent
    l(l+1)(1-W^4)/4 sech^2 form), and both sides of the virial identity
    int W'^2 dr = l(l+1) int W^2 (1-W^2) sech^2 dr.
    """

    params: PhysParams
    kind: str
    parity: Parity
    n: int
    shoot: float
    r: np.ndarray
    w: np.ndarray
    wprime: np.ndarray
    w_inf: float
    energy: float
    energy_quartic: float
    virial_lhs: float
    virial_rhs: float
    r_max: float

    @property
    def label(self) -> str:
        if self.kind == "vacuum":
            return "W0" if self.shoot > 0 else "-W0"
        if self.kind == "saddle":
            return "Wstar"
        sign = "-" if self.shoot < 0 else ""
        return f"{sign}W{self.n}"

    @property
    def is_constant(self) -> bool:
        return self.kind in ("vacuum", "saddle")

    def __neg__(self) -> "StaticProfile":
        if self.kind == "saddle":
            return self
        return StaticProfile(
            self.params, self.kind, self.parity, self.n, -self.shoot,
            self.r, -self.w, -self.wprime, -self.w_inf,
            self.energy, self.energy_quartic, self.virial_lhs, self.virial_rhs,
            self.r_max,
        )

    def value_at(self, r: np.ndarray) -> np.ndarray:
        return np.interp(r, self.r, self.w)


def _standard_grid(r_max: float) -> np.ndarray:
    n = int(round(r_max / PROFILE_STEP))
    return np.linspace(0.0, r_max, n + 1)


def _reflect(r, w, wp, parity):
    # W(-r) = sign W(r) implies W'(-r) = -sign W'(r)
    sign = -1.0 if parity == "odd" else 1.0
    r_full = np.concatenate((-r[:0:-1], r))
    w_full = np.concatenate((sign * w[:0:-1], w))
    wp_full = np.concatenate((-sign * wp[:0:-1], wp))
    return r_full, w_full, wp_full


def vacuum_profile(params: PhysParams, r_max: float = DEFAULT_R_MAX,
                   sign: float = 1.0) -> StaticProfile:
    r_half = _standard_grid(r_max)
    r, w, wp = _reflect(r_half, np.full_like(r_half, sign), np.zeros_like(r_half),
                        "even")
    return StaticProfile(params, "vacuum", "even", 0, sign, r, w, wp,
                         w_inf=sign, energy=0.0, energy_quartic=0.0,
                         virial_lhs=0.0, virial_rhs=0.0, r_max=r_max)


def saddle_profile(params: PhysParams, r_max: float = DEFAULT_R_MAX) -> StaticProfile:
    r_half = _standard_grid(r_max)
    zeros = np.zeros_like(r_half)
    r, w, wp = _reflect(r_half, zeros, zeros, "even")
    half = params.coupling / 2.0
    return StaticProfile(params, "saddle", "even", 0, 0.0, r, w, wp,
                         w_inf=0.0, energy=half, energy_quartic=half,
                         virial_lhs=0.0, virial_rhs=0.0, r_max=r_max)


# ---------------------------------------------------------------------------
# profile polishing

def _tail_coeffs(lam, w_inf):
    # W = W_inf + B e^{-2r} + C e^{-4r} + O(e^{-6r}) solves the field
    # equation order by order in e^{-2r}
    f = w_inf * (1.0 - w_inf ** 2)
    fp = 1.0 - 3.0 * w_inf ** 2
    b = -lam * f
    c = lam * (2.0 * f - fp * b) / 4.0
    return b, c


def _tail_state(lam: float, w_inf: float, r: float) -> tuple[float, float]:
    b, c = _tail_coeffs(lam, w_inf)
    e2, e4 = math.exp(-2.0 * r), math.exp(-4.0 * r)
    return w_inf + b * e2 + c * e4, -2.0 * b * e2 - 4.0 * c * e4


def _plateau_guess(samples: ShotSamples) -> tuple[float, float]:
    """Radius and field value where a near-critical shot runs flattest.

    Past its last sign change a near-critical trajectory hugs the limit
    W_inf of the solution it shadows before the unstable mode peels it off;
    the flattest sampled stretch estimates W_inf.
    """
    r, w, wp = samples.r, samples.w, samples.wprime
    flips = np.flatnonzero(w[:-1] * w[1:] < 0.0)
    r_last = r[flips[-1] + 1] if flips.size else 0.0
    mask = (r >= r_last + 0.25) & (r <= r[-1] - 0.25)
    if not np.any(mask):
        mask = r >= 0.5 * r[-1]
    idx = np.flatnonzero(mask)
    i_c = idx[np.argmin(np.abs(wp[idx]))]
    return float(r[i_c]), float(np.clip(w[i_c], -0.999, 0.999))


def _collocation_solve(params: PhysParams, parity: Parity,
                       samples: ShotSamples, r_c: float, w_inf_guess: float):
    """Two-point solve on [0, R] with the outer end tied to the tail manifold.

    The unknown parameter is W_inf; the guess is the near-critical shot,
    frozen at its plateau value beyond r_c where the shot has peeled off.
    """
    lam = params.coupling
    R = R_COLLOCATION
    e2, e4 = math.exp(-2.0 * R), math.exp(-4.0 * R)

    def fun(r, y, p):
        sech2 = 1.0 / np.cosh(r) ** 2
        return np.vstack((y[1], -lam * sech2 * y[0] * (1.0 - y[0] ** 2)))

    def bc(ya, yb, p):
        b, c = _tail_coeffs(lam, p[0])
        center = ya[0] if parity == "odd" else ya[1]
        return np.array((center,
                         yb[0] - (p[0] + b * e2 + c * e4),
                         yb[1] + 2.0 * b * e2 + 4.0 * c * e4))

    mesh = np.linspace(0.0, R, 561)
    w0 = np.where(mesh <= r_c, np.interp(mesh, samples.r, samples.w),
                  w_inf_guess)
    wp0 = np.where(mesh <= r_c, np.interp(mesh, samples.r, samples.wprime), 0.0)
    np.clip(w0, -0.995, 0.995, out=w0)
    # the collocation residual estimate bottoms out near 1e-10 at moderate
    # coupling and earlier when the field gradients are steep
    tol = BVP_TOL if lam <= INWARD_SAFE_COUPLING else 1e-9
    sol = solve_bvp(fun, bc, mesh, np.vstack((w0, wp0)), p=(w_inf_guess,),
                    tol=tol, max_nodes=BVP_MAX_NODES)
    if sol.status != 0:
        raise BracketFailureError(f"collocation polish failed: {sol.message}")
    w_inf = float(sol.p[0])
    # at strong coupling the limit sits within roundoff of the vacuum
    if not 0.0 < abs(w_inf) <= 1.0 + 1e-12:
        raise BracketFailureError(
            f"collocation limit W_inf = {w_inf} out of range")
    if np.max(np.abs(sol.y[0])) > 1.0 + 1e-12:
        raise BracketFailureError("collocation solution left the strip |W| < 1")
    return sol


def _flow_rhs(lam: float):
    # state: W, W', then running integrals of the energy density, both
    # virial sides and the quartic energy form (half-line densities)
    def fun(r, y):
        w, wp = y[0], y[1]
        sech2 = 1.0 / np.cosh(r) ** 2
        one_m_w2 = 1.0 - w * w
        return (
            wp,
            -lam * sech2 * w * one_m_w2,
            wp * wp + 0.5 * lam * sech2 * one_m_w2 ** 2,
            wp * wp,
            lam * sech2 * w * w * one_m_w2,
            0.25 * lam * sech2 * (1.0 - w ** 4),
        )

    return fun


def _inward_center_miss(params: PhysParams, parity: Parity, w_inf: float,
                        r_max: float) -> float:
    lam = params.coupling
    sol = solve_ivp(_field_ode(lam), (r_max, 0.0),
                    _tail_state(lam, w_inf, r_max), method="DOP853",
                    rtol=FLOW_RTOL, atol=FLOW_ATOL)
    if not sol.success:
        raise BracketFailureError(f"inward run failed: {sol.message}")
    w0, wp0 = float(sol.y[0][-1]), float(sol.y[1][-1])
    return w0 if parity == "odd" else wp0


def _polish_w_inf(params: PhysParams, parity: Parity, w_inf: float,
                  r_max: float) -> float:
    """Retune W_inf until the inward run lands on the parity condition."""

    def miss(v):
        return _inward_center_miss(params, parity, v, r_max)

    delta = 1e-9 * max(1.0, abs(w_inf))
    for _ in range(9):
        lo, hi = w_inf - delta, w_inf + delta
        f_lo, f_hi = miss(lo), miss(hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if f_lo * f_hi < 0.0:
            return float(brentq(miss, lo, hi, xtol=1e-15, rtol=1e-15,
                                maxiter=120))
        if delta > 1e-3 * max(1.0, abs(w_inf)):
            break
        delta *= 12.0
    raise BracketFailureError(
        "inward polish could not bracket the parity condition")


def _flow_profile(params: PhysParams, parity: Parity, n: int, w_inf: float,
                  r_max: float) -> StaticProfile:
    """Sample one inward trajectory launched on the tail manifold at r_max."""
    lam = params.coupling
    grid = _standard_grid(r_max)
    w_t, wp_t = _tail_state(lam, w_inf, r_max)
    sol = solve_ivp(_flow_rhs(lam), (r_max, 0.0),
                    (w_t, wp_t, 0.0, 0.0, 0.0, 0.0), method="DOP853",
                    rtol=FLOW_RTOL,
                    atol=(FLOW_ATOL, FLOW_ATOL, 1e-12, 1e-12, 1e-12, 1e-12),
                    t_eval=grid[::-1], dense_output=True)
    if not sol.success:
        raise BracketFailureError(f"inward resampling failed: {sol.message}")
    w = sol.y[0][::-1].copy()
    wp = sol.y[1][::-1].copy()
    if np.max(np.abs(w)) >= 1.0:
        raise BracketFailureError("polished profile left the strip |W| < 1")
    # integrals accumulated from r_max down to 0 carry a flipped sign
    energy, vl, vr, eq = (-float(sol.y[k][-1]) for k in (2, 3, 4, 5))
    n_samples = max(1601, int(24.0 * r_max * math.sqrt(max(lam, 1.0))))
    zeros_half = _count_zeros(sol.sol, 0.0, r_max, n_samples)
    n_found = 2 * zeros_half + (1 if parity == "odd" else 0)
    if n_found != n:
        raise BracketFailureError(
            f"polished profile has {n_found} zeros, expected {n}")
    shoot = wp[0] if parity == "odd" else w[0]
    r_full, w_full, wp_full = _reflect(grid, w, wp, parity)
    return StaticProfile(params, "excited", parity, n, float(shoot),
                         r_full, w_full, wp_full, w_inf,
                         energy, 2.0 * eq, 2.0 * vl, 2.0 * vr, r_max)


def _collocation_profile(params: PhysParams, parity: Parity, n: int, bvp_sol,
                         r_max: float) -> StaticProfile:
    """Store the collocation interpolant, extended by the analytic tail."""
    lam = params.coupling
    grid = _standard_grid(r_max)
    w_inf = float(bvp_sol.p[0])
    w = np.empty_like(grid)
    wp = np.empty_like(grid)
    inner = grid <= R_COLLOCATION
    y_in = bvp_sol.sol(grid[inner])
    w[inner], wp[inner] = y_in[0], y_in[1]
    b, c = _tail_coeffs(lam, w_inf)
    e2 = np.exp(-2.0 * grid[~inner])
    w[~inner] = w_inf + b * e2 + c * e2 ** 2
    wp[~inner] = -2.0 * b * e2 - 4.0 * c * e2 ** 2
    if np.max(np.abs(w)) > 1.0 + 1e-12:
        raise BracketFailureError("polished profile left the strip |W| < 1")
    n_samples = max(1601, int(24.0 * r_max * math.sqrt(max(lam, 1.0))))
    zeros_half = _count_zeros(bvp_sol.sol, 0.0, min(R_COLLOCATION, r_max),
                              n_samples)
    n_found = 2 * zeros_half + (1 if parity == "odd" else 0)
    if n_found != n:
        raise BracketFailureError(
            f"polished profile has {n_found} zeros, expected {n}")
    sech2 = 1.0 / np.cosh(grid) ** 2
    energy = float(simpson(wp ** 2 + 0.5 * lam * sech2 * (1.0 - w ** 2) ** 2,
                           x=grid))
    vl = float(simpson(wp ** 2, x=grid))
    vr = float(simpson(lam * sech2 * w ** 2 * (1.0 - w ** 2), x=grid))
    eq = float(simpson(0.25 * lam * sech2 * (1.0 - w ** 4), x=grid))
    shoot = wp[0] if parity == "odd" else w[0]
    r_full, w_full, wp_full = _reflect(grid, w, wp, parity)
    return StaticProfile(params, "excited", parity, n, float(shoot),
                         r_full, w_full, wp_full, w_inf,
                         energy, 2.0 * eq, 2.0 * vl, 2.0 * vr, r_max)


def find_static(
    params: PhysParams,
    n: int,
    r_max: float = DEFAULT_R_MAX,
    sign: float = 1.0,
    shoot_hi: float | None = None,
) -> StaticProfile:
    """Locate the static solution with exactly n zeros (1 <= n < ell).

    shoot_hi optionally seeds the upper end of the bracket scan, e.g. with
    the shooting parameter of the previously found solution of the same
    parity.  sign = -1 returns the pointwise negation (shooting with the
    negated parameter).  Integer ell is fine here as long as n stays below
    it; only the catalogue as a whole is ambiguous at the bifurcation.
    """
    if n < 1 or n >= params.ell:
        raise NoSuchSolutionError(
            f"static solutions with {n} zeros require n >= 1 and n < ell "
            f"(ell = {params.ell})")
    parity: Parity = "odd" if n % 2 else "even"
    m = n // 2
    lam = params.coupling
    if shoot_hi is None:
        hi = math.sqrt(lam / 2.0) if parity == "odd" else 1.0 - 1e-9
    else:
        hi = shoot_hi
    lo = None
    # at large coupling the seed can start below the step: push it up first
    for _ in range(200):
        if _shot_score(params, parity, hi, r_max) <= m:
            break
        lo = hi
        hi = hi * 1.1 if parity == "odd" else 1.0 - 0.125 * (1.0 - hi)
        if parity == "even" and 1.0 - hi < 1e-14:
            raise BracketFailureError(
                f"no upper bracket below W(0) = 1 for n = {n}")
    else:
        raise BracketFailureError(f"no upper bracket found for n = {n}")
    if lo is None:
        probe = hi
        for _ in range(220):
            probe *= 0.9
            if probe < 1e-14:
                break
            if _shot_score(params, parity, probe, r_max) >= m + 1:
                lo = probe
                break
            hi = probe
    if lo is None:
        raise BracketFailureError(
            f"no lower bracket found for n = {n} at ell = {params.ell}")
    for _ in range(MAX_BISECT):
        if hi - lo <= BRACKET_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        if _shot_score(params, parity, mid, r_max) <= m:
            hi = mid
        else:
            lo = mid
    mid = 0.5 * (lo + hi)
    _, samples = integrate_static(params, parity, mid, r_max)
    r_c, w_inf_guess = _plateau_guess(samples)
    bvp_sol = _collocation_solve(params, parity, samples, r_c, w_inf_guess)
    if lam <= INWARD_SAFE_COUPLING:
        w_inf = _polish_w_inf(params, parity, float(bvp_sol.p[0]), r_max)
        profile = _flow_profile(params, parity, n, w_inf, r_max)
    else:
        profile = _collocation_profile(params, parity, n, bvp_sol, r_max)
    if abs(profile.shoot - mid) > 1e-7 + 1e-5 * abs(mid):
        raise BracketFailureError(
            f"polish drifted off the bisected branch: shooting parameter "
            f"{profile.shoot} vs bracket midpoint {mid}")
    return -profile if sign < 0 else profile


def enumerate_statics(params: PhysParams, r_max: float = DEFAULT_R_MAX
                      ) -> list[StaticProfile]:
    """The full catalogue [W_0, W_*, W_1, ..., W_n] with n = floor(ell).

    Solutions of one parity are found in order of increasing zero count,
    each bisection bracketed from above by the previous shooting parameter:
    the critical values b_1 > b_3 > ... (and s_2 > s_4 > ...) are nested.
    """
    params.require_noninteger("static catalogue")
    out = [vacuum_profile(params, r_max), saddle_profile(params, r_max)]
    last_shoot: dict[Parity, float | None] = {"odd": None, "even": None}
    for n in range(1, math.floor(params.ell) + 1):
        parity: Parity = "odd" if n % 2 else "even"
        profile = find_static(params, n, r_max, shoot_hi=last_shoot[parity])
        last_shoot[parity] = profile.shoot
        out.append(profile)
    return out


# ---------------------------------------------------------------------------
# diagnostics

def static_energy(profile: StaticProfile, tol: float = 1e-7) -> float:
    """Energy of a static solution, cross-checked between two quadratures.

    The direct form integrates (W'^2 + (l(l+1)/2) sech^2 (1-W^2)^2)/2 over
    the line; the virial-reduced form integrates l(l+1)(1-W^4) sech^2 / 4.
    Disagreement beyond tol * (1 + E) raises EnergyInconsistencyError.
    """
    if profile.is_constant:
        return profile.energy
    gap = abs(profile.energy - profile.energy_quartic)
    if gap > tol * (1.0 + abs(profile.energy)):
        raise EnergyInconsistencyError(
            f"energy quadratures disagree by {gap:.3e} "
            f"({profile.energy} vs {profile.energy_quartic})")
    return profile.energy


def identity_residuals(profile: StaticProfile) -> dict[str, float]:
    """Integral identities a true static solution must satisfy.

    Returns virial_residual = |int W'^2 - l(l+1) int W^2(1-W^2) sech^2|,
    odd_identity_residual = |int tanh sech^2 (1-W^2)^2| (zero by reflection
    symmetry), and q_monotonicity_violations, the number of grid intervals
    on r >= 0 where Q = cosh^2 W'^2 - (l(l+1)/2)(1-W^2)^2 decreases by more
    than the cosh^2-amplified sampling noise allows.
    """
    lam = profile.params.coupling
    r, w, wp = profile.r, profile.w, profile.wprime
    virial = abs(profile.virial_lhs - profile.virial_rhs)
    sech2 = 1.0 / np.cosh(r) ** 2
    integrand = np.tanh(r) * sech2 * (1.0 - w ** 2) ** 2
    odd_identity = abs(float(np.trapezoid(integrand, r)))
    mask = r >= 0.0
    rr, ww, wwp = r[mask], w[mask], wp[mask]
    cosh2 = np.cosh(rr) ** 2
    q = cosh2 * wwp ** 2 - 0.5 * lam * (1.0 - ww ** 2) ** 2
    noise = 100.0 * FLOW_ATOL
    slack = np.maximum(1e-10, 3.0 * cosh2[1:] * noise ** 2)
    violations = int(np.sum(q[1:] - q[:-1] < -slack))
    return {
        "virial_residual": virial,
        "odd_identity_residual": odd_identity,
        "q_monotonicity_violations": violations,
    }


def legendre_limit(params: PhysParams, r_max: float = DEFAULT_R_MAX
                   ) -> tuple[int, ShotSamples]:
    """Zero count of the zero-amplitude limit w'' + l(l+1) sech^2 w = 0.

    The solution with w(0) = 0, w'(0) = 1 is a Legendre function of tanh r;
    its number of zeros on r > 0 tells how many odd static solutions the
    nonlinear problem supports.
    """
    lam = params.coupling

    def fun(r, y):
        return (y[1], -lam / np.cosh(r) ** 2 * y[0])

    sol = solve_ivp(fun, (0.0, r_max), (0.0, 1.0), method="DOP853",
                    rtol=SHOOT_RTOL, atol=SHOOT_ATOL, dense_output=True)
    n_samples = max(1601, int(24 * r_max * math.sqrt(max(lam, 1.0))))
    zeros = _count_zeros(sol.sol, 0.0, r_max, n_samples)
    r = np.linspace(0.0, r_max, n_samples)
    w, wp = sol.sol(r)
    return zeros, ShotSamples(r, w, wp)


def to_cheb(profile: StaticProfile, M: int) -> ChebSeries:
    """Chebyshev series of the profile as a function of x = tanh r.

    Values at the extrema grid x_j = cos(pi j / M) are spline-interpolated
    from the stored samples (the largest finite radius needed, at
    atanh(cos(pi/M)), stays far inside the sampled range); x = +-1 carry the
    limits +-W_inf.  Wrong-parity coefficients are zeroed after a smallness
    check.
    """
    if M < 2:
        raise PreconditionError("truncation order M must be at least 2")
    if profile.is_constant:
        a = np.zeros(M + 1)
        a[0] = profile.w_inf
        return ChebSeries(a)
    half = profile.r >= 0.0
    spline = CubicSpline(profile.r[half], profile.w[half])
    xj = np.cos(np.pi * np.arange(M + 1) / M)
    vals = np.empty(M + 1)
    vals[0] = profile.w_inf
    vals[M] = -profile.w_inf if profile.parity == "odd" else profile.w_inf
    sign = -1.0 if profile.parity == "odd" else 1.0
    interior = np.arctanh(np.abs(xj[1:M]))
    v = spline(interior)
    vals[1:M] = np.where(xj[1:M] >= 0.0, v, sign * v)
    # Chebyshev-Lobatto analysis with halved first/last weights
    j = np.arange(M + 1)
    weights = np.where((j == 0) | (j == M), 0.5, 1.0)
    cosmat = np.cos(np.pi * np.outer(j, j) / M)
    a = (2.0 / M) * (cosmat @ (weights * vals))
    a[0] *= 0.5
    a[M] *= 0.5
    wrong = a[0::2] if profile.parity == "odd" else a[1::2]
    scale = np.max(np.abs(a)) or 1.0
    if np.max(np.abs(wrong)) > 1e-8 * scale:
        raise EnergyInconsistencyError(
            "parity contamination in the Chebyshev transform")
    if profile.parity == "odd":
        a[0::2] = 0.0
    else:
        a[1::2] = 0.0
    series = ChebSeries(a)
    warn_if_underresolved(series, f"to_cheb({profile.label}, M={M})")
    return series
