"""Time integration: conservation structure, parity, steppers, restarts."""
import numpy as np
import pytest

from wormym.errors import DomainError, PreconditionError
from wormym.evolution import (EvolConfig, energy_balance_residual, evolve,
                              linearized_evolve)
from wormym.galerkin import ChebSeries, EvolState
from wormym.params import PhysParams
from wormym.spectra import pencil_spectrum
from wormym.statics import to_cheb


def _state(entries, N, ell, entries_dot=None):
    params = PhysParams(ell=ell)
    return EvolState(ChebSeries.from_map(entries, N),
                     ChebSeries.from_map(entries_dot or {}, N), 0.0, params)


@pytest.fixture(scope="module")
def generic_run():
    initial = _state({1: 1.0, 4: 1.0, 5: 1.0}, 40, 3.5)
    return evolve(initial, EvolConfig(N=40, tau_end=12.0, stride=0.01))


def test_energy_monotone_nonincreasing(generic_run):
    e = generic_run.energy
    assert np.max(np.diff(e)) <= 1e-8 * max(1.0, e[0])
    assert e[-1] < e[0]


def test_energy_balance(generic_run):
    assert energy_balance_residual(generic_run) < 1e-6


def test_recording_grid_and_rows(generic_run):
    t = generic_run.times
    assert t[0] == 0.0 and t[-1] == pytest.approx(12.0)
    assert np.allclose(np.diff(t), 0.01)
    assert generic_run.coeffs.shape == (len(t), 41)
    assert np.array_equal(generic_run.coeff(3), generic_run.coeffs[:, 3])
    with pytest.raises(PreconditionError):
        generic_run.coeff(41)
    with pytest.raises(DomainError):
        generic_run.field_at(1.2)


def test_parity_preserved_by_the_flow():
    odd = _state({1: 0.8, 3: 0.2}, 20, 2.5)
    traj = evolve(odd, EvolConfig(N=20, tau_end=6.0, stride=0.1))
    even_mass = np.sum(traj.coeffs[:, 0::2] ** 2, axis=1)
    odd_mass = np.sum(traj.coeffs[:, 1::2] ** 2, axis=1)
    assert np.max(even_mass) < 1e-22 * np.max(odd_mass)


def test_vacuum_is_a_fixed_point():
    traj = evolve(_state({0: 1.0}, 12, 3.5),
                  EvolConfig(N=12, tau_end=5.0, stride=0.5))
    assert np.max(np.abs(traj.coeffs - traj.coeffs[0])) < 1e-12
    assert np.max(np.abs(traj.coeffs_dot)) < 1e-12


def test_restart_matches_single_run(generic_run):
    mid = generic_run.state_at(6.0)
    tail = evolve(mid, EvolConfig(N=40, tau_end=6.0, stride=0.01))
    resumed = tail.coeffs[-1]
    straight = generic_run.coeffs[-1]
    assert tail.times[-1] + mid.tau == pytest.approx(generic_run.times[-1])
    assert np.max(np.abs(resumed - straight)) < 1e-7


def test_fixed_stepper_tracks_adaptive():
    initial = _state({1: 0.5}, 12, 2.5)
    adaptive = evolve(initial, EvolConfig(N=12, tau_end=4.0, stride=0.5))
    fixed = evolve(initial, EvolConfig(N=12, tau_end=4.0, stride=0.5,
                                       stepper="rk4"))
    assert np.max(np.abs(adaptive.coeffs - fixed.coeffs)) < 1e-6


def test_linearized_flow_reproduces_pencil_rate(saddle35, p35):
    # lowest even mode of the saddle at ell = 3.5 grows like exp(3.5 tau)
    background = to_cheb(saddle35, 16)
    initial = _state({0: 1e-6}, 16, 3.5)
    config = EvolConfig(N=16, tau_end=4.0, stride=0.1)
    traj = linearized_evolve(background, initial, config)
    growth = traj.field_at(0.0)
    rate = np.polyfit(traj.times[20:], np.log(np.abs(growth[20:])), 1)[0]
    top = max(m.lam.real for m in pencil_spectrum(saddle35, M=30))
    assert rate == pytest.approx(top, rel=1e-4)
    assert traj.linear
    with pytest.raises(PreconditionError):
        traj.energy


def test_distance_to_targets(generic_run, saddle35):
    d_series = generic_run.distance_to(ChebSeries.from_map({0: 1.0}, 24))
    d_profile = generic_run.distance_to(saddle35)
    assert d_series.shape == generic_run.times.shape
    assert np.all(d_profile >= 0.0)
    # the generic run decays toward the vacuum, away from the saddle
    assert d_series[-1] < d_series[0]


def test_config_contracts():
    with pytest.raises(PreconditionError):
        EvolConfig(N=0)
    with pytest.raises(PreconditionError):
        EvolConfig(N=4, tau_end=-1.0)
    with pytest.raises(PreconditionError):
        EvolConfig(N=4, stride=0.0)
    with pytest.raises(PreconditionError):
        EvolConfig(N=4, stepper="euler")
    with pytest.raises(DomainError):
        EvolConfig(N=4, obs_x=(1.5,))
