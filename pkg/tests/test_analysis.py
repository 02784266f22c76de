"""Time-series fits, endstate classification, bisection plumbing."""
import numpy as np
import pytest

from wormym.analysis import (_fit_lifetime_slope, classify_endstate,
                             bisect_critical, convergence_table,
                             fit_exponential, fit_powerlaw, fit_ringdown,
                             tuned_family)
from wormym.errors import (DomainError, InsufficientDataError,
                           InsufficientOscillationError,
                           NotSeparatingFamilyError, PreconditionError)
from wormym.evolution import EvolConfig, evolve
from wormym.galerkin import ChebSeries, EvolState
from wormym.params import PhysParams
from wormym.statics import find_static, saddle_profile, vacuum_profile


def _run(entries, N, ell, tau_end, stride=0.05):
    params = PhysParams(ell=ell)
    state = EvolState(ChebSeries.from_map(entries, N),
                      ChebSeries.from_map({}, N), 0.0, params)
    return evolve(state, EvolConfig(N=N, tau_end=tau_end, stride=stride))


# -- synthetic fits ---------------------------------------------------------

def test_exponential_fit_recovers_parameters():
    tau = np.linspace(0.0, 30.0, 601)
    y = 2.5 * np.exp(-0.7 * tau)
    fit = fit_exponential(tau, y, (5.0, 25.0))
    assert fit.rate == pytest.approx(0.7, rel=1e-12)
    assert fit.amplitude == pytest.approx(2.5, rel=1e-12)
    assert fit.residual < 1e-12


def test_exponential_fit_rejects_negative_data():
    tau = np.linspace(0.0, 10.0, 101)
    with pytest.raises(DomainError):
        fit_exponential(tau, np.sin(tau), (0.0, 10.0))


def test_fits_demand_enough_samples():
    tau = np.linspace(0.0, 10.0, 101)
    y = np.exp(-tau)
    with pytest.raises(InsufficientDataError):
        fit_exponential(tau, y, (9.5, 9.9))


def test_powerlaw_fit_plain_and_shifted():
    tau = np.linspace(60.0, 900.0, 2000)
    plain = 3.0 * tau ** -1.5
    fit = fit_powerlaw(tau, plain, (100.0, 800.0))
    assert fit.rate == pytest.approx(-1.5, abs=1e-9)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-6)
    shifted = 0.8 * (tau + 25.0) ** -0.5
    fit = fit_powerlaw(tau, shifted, (100.0, 800.0))
    assert fit.rate == pytest.approx(-0.5, abs=1e-6)
    assert fit.amplitude == pytest.approx(0.8, rel=1e-4)


def test_powerlaw_fit_needs_late_window():
    tau = np.linspace(1.0, 400.0, 500)
    with pytest.raises(PreconditionError):
        fit_powerlaw(tau, tau ** -0.5, (10.0, 300.0))


def test_ringdown_fit_signed_signal():
    tau = np.linspace(0.0, 40.0, 4001)
    y = 1.7 * np.exp(-0.25 * tau) * np.sin(3.1 * tau + 0.4)
    fit = fit_ringdown(tau, y, (5.0, 35.0))
    assert fit.rate == pytest.approx(0.25, rel=1e-10)
    assert fit.frequency == pytest.approx(3.1, rel=1e-10)
    assert fit.amplitude == pytest.approx(1.7, rel=1e-9)


def test_ringdown_fit_folded_signal():
    tau = np.linspace(0.0, 40.0, 4001)
    y = np.abs(0.9 * np.exp(-0.31 * tau) * np.sin(2.7 * tau + 1.1))
    fit = fit_ringdown(tau, y, (5.0, 35.0))
    assert fit.rate == pytest.approx(0.31, rel=1e-2)
    assert fit.frequency == pytest.approx(2.7, rel=1e-3)


def test_ringdown_fit_needs_oscillation():
    tau = np.linspace(0.0, 40.0, 401)
    with pytest.raises(InsufficientOscillationError):
        fit_ringdown(tau, np.exp(-0.3 * tau), (5.0, 35.0))


def test_lifetime_slope_recovery():
    offsets = np.array([1e-4, 1e-6, 1e-8, 1e-10])
    lifetimes = 3.7 - (1.0 / 2.2) * np.log(offsets)
    slope = _fit_lifetime_slope(offsets, lifetimes)
    assert slope == pytest.approx(1.0 / 2.2, rel=1e-12)


# -- endstates on real trajectories ----------------------------------------

def test_generic_even_data_settle_on_the_vacuum():
    params = PhysParams(ell=3.5)
    traj = _run({1: 1.0, 4: 1.0, 5: 1.0}, 24, 3.5, 40.0)
    statics = [vacuum_profile(params), saddle_profile(params)]
    end = classify_endstate(traj, statics, tol=0.1)
    assert end.label == "W0"
    assert end.distance < 1e-6


def test_codimension_one_data_settle_on_the_saddle():
    params = PhysParams(ell=0.125)
    traj = _run({1: 2.0, 5: 1.0}, 16, 0.125, 30.0)
    statics = [vacuum_profile(params), saddle_profile(params)]
    end = classify_endstate(traj, statics, tol=0.1)
    assert end.label == "Wstar"
    assert end.distance < 1e-6


def test_odd_data_above_one_settle_on_w1():
    params = PhysParams(ell=3.5)
    traj = _run({1: 2.0, 5: 1.0}, 32, 3.5, 60.0)
    statics = [vacuum_profile(params), saddle_profile(params),
               find_static(params, 1)]
    end = classify_endstate(traj, statics, tol=0.1)
    assert end.label in ("W1", "-W1")
    assert end.distance < 1e-4


def test_classify_reports_undecided_far_from_everything():
    params = PhysParams(ell=3.5)
    traj = _run({1: 1.0, 4: 1.0, 5: 1.0}, 16, 3.5, 1.0)
    end = classify_endstate(traj, [saddle_profile(params)], tol=1e-3)
    assert end.label == "undecided" and end.profile is None


# -- bisection plumbing ------------------------------------------------------

def test_tuned_family_places_the_amplitude():
    params = PhysParams(ell=3.5)
    family = tuned_family(params, N=12, base={0: -1.0}, index=2)
    state = family(0.37)
    assert state.a.coeffs[0] == -1.0
    assert state.a.coeffs[2] == 0.37
    assert np.all(state.a_dot.coeffs == 0.0)
    assert state.N == 12


def test_bisect_requires_a_separating_bracket():
    params = PhysParams(ell=3.5)
    family = tuned_family(params, N=24, base={0: -1.0}, index=2)
    with pytest.raises(NotSeparatingFamilyError):
        bisect_critical(family, params, (0.05, 0.15), digits=4,
                        family_label="even-c")


def test_convergence_table_requires_room_below_reference():
    params = PhysParams(ell=3.5)
    with pytest.raises(PreconditionError):
        convergence_table({1: 1.0}, params, [10, 50], N_ref=50)
