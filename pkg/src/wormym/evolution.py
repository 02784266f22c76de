"""Time integration of the truncated coefficient system.

A truncation at order N keeps 2(N+1) unknowns (a_n, a_n') and closes the
coefficient ODEs exactly; nothing is imposed at x = +-1 because the
degenerate principal part never needs boundary data.  The flow is
dissipative: the Bondi-type energy of the recorded states can only decrease,
leaking through the endpoint fluxes W_tau(+-1)^2, and the discrete balance
law is the primary accuracy diagnostic for every run.

The default stepper is adaptive eighth-order Runge-Kutta at tight tolerance;
the system is not stiff for the truncations of interest (the fastest linear
rate grows only like N), but a fixed-step classical RK4 with dt ~ 0.5/N^2
is available as an independent cross-check.  Both steppers act linearly on
the coefficient vector between right-hand-side evaluations, so a parity
sector that starts exactly empty stays exactly empty.

Linearized evolution about a static background reuses the pencil matrices:
w(tau, x) obeys  w'' = -(A w + B w'), the same operators whose eigenvalues
are the quasinormal modes, which makes ringdown extraction from these runs
an independent check on the companion spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import solve_ivp

from .errors import (
    BlowupError,
    DomainError,
    PreconditionError,
    StiffnessError,
)
from .galerkin import (
    ChebSeries,
    EvolState,
    _accel,
    _zmat,
    quad_nodes,
    warn_if_underresolved,
)
from .params import PhysParams
from .spectra import pencil_matrices
from .statics import StaticProfile

DEFAULT_TAU_END = 60.0
DEFAULT_STRIDE = 0.05
EVOLVE_RTOL = 1e-10
EVOLVE_ATOL = 1e-12


@dataclass(frozen=True)
class EvolConfig:
    """Run parameters for one trajectory.

    stepper 'adaptive' integrates with DOP853 at (rtol, atol); 'rk4' takes
    fixed steps of size dt (default 0.5/N^2), subdividing the recording
    stride evenly.  obs_x lists field sampling points carried into the
    trajectory metadata.
    """

    N: int
    tau_end: float = DEFAULT_TAU_END
    rtol: float = EVOLVE_RTOL
    atol: float = EVOLVE_ATOL
    stride: float = DEFAULT_STRIDE
    obs_x: tuple[float, ...] = ()
    stepper: str = "adaptive"
    dt: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise PreconditionError("truncation order must be at least 1")
        if not self.tau_end > 0.0:
            raise PreconditionError("tau_end must be positive")
        if not 0.0 < self.stride <= self.tau_end:
            raise PreconditionError("stride must lie in (0, tau_end]")
        if self.stepper not in ("adaptive", "rk4"):
            raise PreconditionError(f"unknown stepper {self.stepper!r}")
        if self.dt is not None and not self.dt > 0.0:
            raise PreconditionError("dt must be positive")
        if any(abs(x) > 1.0 for x in self.obs_x):
            raise DomainError("observation points must lie in [-1, 1]")


class Trajectory:
    """Recorded coefficient history of one run.

    times is the uniform recording grid; coeffs and coeffs_dot hold a_n and
    a_n' row per time, so every recorded row is a full restartable state.
    Observables (energy, fluxes, field values, distances) are derived
    lazily from the rows.
    """

    def __init__(self, params: PhysParams, config: EvolConfig,
                 times: np.ndarray, coeffs: np.ndarray, coeffs_dot: np.ndarray,
                 flux_integral: np.ndarray | None = None,
                 linear: bool = False, background: ChebSeries | None = None):
        self.params = params
        self.config = config
        self.times = times
        self.coeffs = coeffs
        self.coeffs_dot = coeffs_dot
        self.flux_integral = flux_integral
        self.linear = linear
        self.background = background

    def __len__(self) -> int:
        return len(self.times)

    def coeff(self, n: int) -> np.ndarray:
        """Time series of a single coefficient a_n."""
        if not 0 <= n <= self.config.N:
            raise PreconditionError(f"no coefficient {n} at truncation "
                                    f"{self.config.N}")
        return self.coeffs[:, n]

    def field_at(self, x) -> np.ndarray:
        """W(tau, x) for x scalar or array, one row per recorded time."""
        if np.any(np.abs(np.asarray(x)) > 1.0):
            raise DomainError("evaluation point outside [-1, 1]")
        return C.chebval(x, self.coeffs.T)

    def state_at(self, tau: float) -> EvolState:
        """Full state at the recorded time nearest tau."""
        k = int(np.argmin(np.abs(self.times - tau)))
        return EvolState(ChebSeries(self.coeffs[k].copy()),
                         ChebSeries(self.coeffs_dot[k].copy()),
                         float(self.times[k]), self.params)

    @property
    def final_state(self) -> EvolState:
        return self.state_at(float(self.times[-1]))

    def _quad(self):
        return quad_nodes(self.config.N, extra=6)

    @cached_property
    def energy(self) -> np.ndarray:
        """Bondi-type energy per recorded time (nonlinear runs only)."""
        if self.linear:
            raise PreconditionError(
                "the energy functional belongs to the nonlinear flow")
        xq, wq = self._quad()
        W = C.chebval(xq, self.coeffs.T)
        Wt = C.chebval(xq, self.coeffs_dot.T)
        Wx = C.chebval(xq, C.chebder(self.coeffs.T, axis=0))
        lam = self.params.coupling
        rho = 0.5 * (Wt ** 2 + (1.0 - xq ** 2) * Wx ** 2
                     + 0.5 * lam * (1.0 - W ** 2) ** 2)
        return rho @ wq

    @cached_property
    def kinetic_energy(self) -> np.ndarray:
        xq, wq = self._quad()
        Wt = C.chebval(xq, self.coeffs_dot.T)
        return 0.5 * (Wt ** 2 @ wq)

    @cached_property
    def fluxes(self) -> tuple[np.ndarray, np.ndarray]:
        """Instantaneous boundary fluxes (left, right) per recorded time."""
        left = C.chebval(-1.0, self.coeffs_dot.T) ** 2
        right = C.chebval(1.0, self.coeffs_dot.T) ** 2
        return left, right

    def distance_to(self, target) -> np.ndarray:
        """L2([-1,1]) distance of W(tau, .) to a static target, per time."""
        xq, wq = self._quad()
        if isinstance(target, StaticProfile):
            tv = target.value_at(np.arctanh(xq))
        else:
            tv = C.chebval(xq, np.asarray(getattr(target, "coeffs", target),
                                          dtype=float))
        W = C.chebval(xq, self.coeffs.T)
        return np.sqrt(np.clip((W - tv) ** 2 @ wq, 0.0, None))


def _recording_grid(config: EvolConfig) -> np.ndarray:
    k = int(math.floor(config.tau_end / config.stride + 1e-9))
    grid = config.stride * np.arange(k + 1)
    if grid[-1] < config.tau_end - 1e-9 * config.tau_end:
        grid = np.append(grid, config.tau_end)
    return grid


def _prepare_initial(initial: EvolState, config: EvolConfig) -> np.ndarray:
    if initial.N > config.N:
        spill = max(float(np.max(np.abs(initial.a.coeffs[config.N + 1:]))),
                    float(np.max(np.abs(initial.a_dot.coeffs[config.N + 1:]))))
        if spill != 0.0:
            raise PreconditionError(
                f"initial data carry degree > {config.N} coefficients")
        a = initial.a.coeffs[: config.N + 1]
        ad = initial.a_dot.coeffs[: config.N + 1]
    else:
        a = initial.a.padded(config.N).coeffs
        ad = initial.a_dot.padded(config.N).coeffs
    warn_if_underresolved(ChebSeries(a), "initial data")
    return np.concatenate((a, ad)).astype(float)


def _integrate(rhs, y0: np.ndarray, config: EvolConfig) -> tuple[np.ndarray,
                                                                 np.ndarray]:
    grid = _recording_grid(config)
    if config.stepper == "adaptive":
        sol = solve_ivp(rhs, (0.0, float(grid[-1])), y0, method="DOP853",
                        t_eval=grid, rtol=config.rtol, atol=config.atol)
        if not sol.success:
            raise StiffnessError(f"adaptive stepper gave up: {sol.message}")
        rows = sol.y.T
    else:
        dt = config.dt if config.dt is not None else 0.5 / config.N ** 2
        rows = np.empty((len(grid), len(y0)))
        rows[0] = y = y0.copy()
        for k in range(1, len(grid)):
            span = grid[k] - grid[k - 1]
            n_sub = max(1, int(math.ceil(span / dt - 1e-12)))
            h = span / n_sub
            for _ in range(n_sub):
                k1 = rhs(0.0, y)
                k2 = rhs(0.0, y + 0.5 * h * k1)
                k3 = rhs(0.0, y + 0.5 * h * k2)
                k4 = rhs(0.0, y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rows[k] = y
    if not np.all(np.isfinite(rows)):
        raise BlowupError("nonfinite coefficients; shrink dt or raise N")
    return grid, rows


def _boundary_power(ad: np.ndarray) -> float:
    # W_tau(-1)^2 + W_tau(+1)^2 from the alternating/plain coefficient sums
    plain = float(np.sum(ad))
    alt = float(np.sum(ad[0::2]) - np.sum(ad[1::2]))
    return alt * alt + plain * plain


def evolve(initial: EvolState, config: EvolConfig) -> Trajectory:
    """Integrate the nonlinear coefficient system from an initial state.

    The state is padded (or checked exactly representable) at the configured
    truncation; a relative coefficient tail above 1e-8 only warns, matching
    the series diagnostics elsewhere.  The cumulative boundary flux rides
    along as one extra quadrature variable so the balance diagnostic is
    limited by the stepper tolerance, not by the recording stride.
    """
    params = initial.params
    y0 = np.append(_prepare_initial(initial, config), 0.0)
    n = config.N + 1
    lam = params.coupling
    Z = _zmat(config.N)

    def rhs(_t, y):
        ad = y[n:2 * n]
        return np.concatenate((ad, _accel(y[:n], ad, lam, Z),
                               (_boundary_power(ad),)))

    grid, rows = _integrate(rhs, y0, config)
    return Trajectory(params, config, grid, rows[:, :n].copy(),
                      rows[:, n:2 * n].copy(), rows[:, -1].copy())


def linearized_evolve(background: ChebSeries, initial: EvolState,
                      config: EvolConfig) -> Trajectory:
    """Integrate the flow linearized about a static background series.

    The right-hand side is w'' = -(A w + B w') with the pencil matrices of
    the background, so recorded ringdowns probe exactly the spectrum that
    the companion eigensolver reports.
    """
    params = initial.params
    A, B = pencil_matrices(background, params, config.N)
    y0 = np.append(_prepare_initial(initial, config), 0.0)
    n = config.N + 1

    def rhs(_t, y):
        ad = y[n:2 * n]
        return np.concatenate((ad, -(A @ y[:n] + B @ ad),
                               (_boundary_power(ad),)))

    grid, rows = _integrate(rhs, y0, config)
    return Trajectory(params, config, grid, rows[:, :n].copy(),
                      rows[:, n:2 * n].copy(), rows[:, -1].copy(),
                      linear=True, background=background)


def energy_balance_residual(trajectory: Trajectory) -> float:
    """Worst violation of the discrete energy balance law.

    Over each recorded interval the energy drop must match the integrated
    outgoing flux; the maximum absolute mismatch is the standard global
    accuracy figure for a run.  The co-integrated flux quadrature is used
    when the trajectory carries one (it always does for fresh runs); the
    trapezoidal fallback exists for reconstructed histories but is limited
    by the recording stride wherever the flux ramps quickly.
    """
    if trajectory.linear:
        raise PreconditionError(
            "the balance law belongs to the nonlinear flow")
    if len(trajectory) < 2:
        raise PreconditionError("balance needs at least two recorded times")
    E = trajectory.energy
    if trajectory.flux_integral is not None:
        leak = np.diff(trajectory.flux_integral)
    else:
        left, right = trajectory.fluxes
        flux = left + right
        leak = 0.5 * np.diff(trajectory.times) * (flux[1:] + flux[:-1])
    return float(np.max(np.abs(np.diff(E) + leak)))
