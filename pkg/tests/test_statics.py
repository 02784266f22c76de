"""Static catalogue: profiles, energies, integral identities."""
import math

import numpy as np
import pytest

from wormym.errors import NumericalError, PreconditionError
from wormym.params import PhysParams
from wormym.statics import (enumerate_statics, find_static,
                            identity_residuals, legendre_limit,
                            saddle_profile, static_energy, to_cheb,
                            vacuum_profile)


@pytest.fixture(scope="module")
def catalogue25():
    return enumerate_statics(PhysParams(ell=2.5))


def test_constant_solutions():
    p = PhysParams(ell=2.5)
    w0 = vacuum_profile(p)
    star = saddle_profile(p)
    assert w0.label == "W0" and w0.is_constant and w0.energy == 0.0
    assert np.all(w0.w == 1.0)
    assert star.label == "Wstar" and np.all(star.w == 0.0)
    assert star.energy == pytest.approx(0.5 * p.coupling, rel=1e-15)
    neg = -w0
    assert neg.w_inf == -1.0 and np.all(neg.w == -1.0)
    assert (-star).w_inf == 0.0


def test_catalogue_contents(catalogue25):
    labels = [p.label for p in catalogue25]
    assert labels == ["W0", "Wstar", "W1", "W2"]
    parities = {p.label: p.parity for p in catalogue25}
    assert parities["W1"] == "odd" and parities["W2"] == "even"
    zero_counts = {p.label: p.n for p in catalogue25}
    assert zero_counts == {"W0": 0, "Wstar": 0, "W1": 1, "W2": 2}


def test_energy_ordering(catalogue25):
    by_label = {p.label: p for p in catalogue25}
    e_star = by_label["Wstar"].energy
    e1, e2 = by_label["W1"].energy, by_label["W2"].energy
    assert 0.0 < e1 < e2 < e_star
    for p in catalogue25:
        if not p.is_constant:
            assert static_energy(p) == p.energy


def test_profiles_bounded_and_tailed(catalogue25):
    for p in catalogue25:
        if p.is_constant:
            assert np.max(np.abs(p.w)) <= 1.0
        else:
            # excited tails settle strictly inside the vacuum values
            assert np.max(np.abs(p.w)) < 1.0
            assert 0.0 < abs(p.w_inf) < 1.0
            assert abs(p.w[-1] - p.w_inf) < 1e-7


def test_integral_identities(catalogue25):
    for p in catalogue25:
        if p.is_constant:
            continue
        res = identity_residuals(p)
        assert res["virial_residual"] < 1e-6
        assert res["odd_identity_residual"] < 1e-6
        assert res["q_monotonicity_violations"] == 0


def test_value_at_clamps_to_tails(catalogue25):
    w1 = next(p for p in catalogue25 if p.label == "W1")
    assert w1.value_at(w1.r_max + 50.0) == pytest.approx(w1.w_inf)
    assert w1.value_at(-w1.r_max - 50.0) == pytest.approx(-w1.w_inf)


def test_mirrored_profile():
    p = PhysParams(ell=3.5)
    plus = find_static(p, 1)
    minus = find_static(p, 1, sign=-1)
    assert minus.label.endswith("W1") and minus.label != plus.label
    assert np.allclose(minus.w, -plus.w)
    assert minus.energy == pytest.approx(plus.energy, rel=1e-12)


def test_excited_profile_requires_large_enough_ell():
    with pytest.raises((PreconditionError, NumericalError)):
        find_static(PhysParams(ell=0.5), 1)


def test_large_ell_profile_near_kink():
    p = PhysParams(ell=12.5)
    w1 = find_static(p, 1)
    kink = np.tanh(math.sqrt(0.5 * p.coupling) * w1.r)
    assert float(np.max(np.abs(w1.w - kink))) < 0.02


def test_legendre_zero_count_matches_catalogue():
    for ell, expected in ((0.5, 0), (2.5, 1), (4.5, 2)):
        zeros, _ = legendre_limit(PhysParams(ell=ell))
        assert zeros == expected


def test_chebyshev_expansion_reproduces_profile(catalogue25):
    w2 = next(p for p in catalogue25 if p.label == "W2")
    series = to_cheb(w2, 60)
    x = np.linspace(-0.99, 0.99, 101)
    # accuracy floor set by the profile's stored-sample spline
    assert np.allclose(series(x), w2.value_at(np.arctanh(x)), atol=1e-4)
    even, odd = series.parity_mass()
    assert odd == 0.0
