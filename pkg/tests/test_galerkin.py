"""Coefficient-space building blocks against independent oracles.

The cubic term and the x-derivative term are the only hand-rolled
recurrences in the package, so both are checked against a general-purpose
oracle: repeated numpy.polynomial.chebyshev products for the cube, and
pointwise sampled differentiation for x W_x.
"""
import numpy as np
import numpy.polynomial.chebyshev as C
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wormym.errors import DomainError, PreconditionError
from wormym.galerkin import (ChebSeries, EvolState, bondi_energy,
                             cheb_product, eval_series, nonlinear_w, rhs,
                             x_deriv_z)
from wormym.params import PhysParams

N_RANDOM = 1000
MAX_DEGREE = 10
ORACLE_TOL = 1e-12

_rng = np.random.default_rng(20240817)
_SERIES = [_rng.uniform(-1.0, 1.0, size=_rng.integers(1, MAX_DEGREE + 2))
           for _ in range(N_RANDOM)]
_XS = np.linspace(-1.0, 1.0, 41)

series_strategy = st.lists(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
    min_size=1, max_size=9).map(np.asarray)


def test_cube_matches_triple_chebyshev_product():
    worst = 0.0
    for a in _SERIES:
        ours = nonlinear_w(a).coeffs
        oracle = C.chebmul(C.chebmul(a, a), a)
        m = max(len(ours), len(oracle))
        diff = np.abs(np.pad(ours, (0, m - len(ours)))
                      - np.pad(oracle, (0, m - len(oracle))))
        worst = max(worst, float(diff.max()))
    assert worst < ORACLE_TOL


def test_x_derivative_matches_sampled_differentiation():
    worst = 0.0
    for a in _SERIES:
        ours = eval_series(x_deriv_z(a), _XS)
        oracle = _XS * C.chebval(_XS, C.chebder(a)) if len(a) > 1 \
            else np.zeros_like(_XS)
        worst = max(worst, float(np.max(np.abs(ours - oracle))))
    assert worst < ORACLE_TOL


@pytest.mark.parametrize("ell", [0.5, 3.5])
def test_rhs_fixed_points_exact(ell):
    params = PhysParams(ell=ell)
    for N in range(1, 51):
        zero = ChebSeries.zeros(N)
        assert np.all(rhs(EvolState(zero, zero, 0.0, params)).coeffs == 0.0)
        ground = ChebSeries.from_map({0: 1.0}, N)
        assert np.all(rhs(EvolState(ground, zero, 0.0, params)).coeffs == 0.0)


@given(series_strategy, series_strategy)
def test_product_agrees_pointwise(u, v):
    prod = cheb_product(u, v)
    xs = np.linspace(-1.0, 1.0, 17)
    assert np.allclose(eval_series(prod, xs),
                       C.chebval(xs, u) * C.chebval(xs, v), atol=1e-10)


@given(series_strategy, series_strategy)
def test_product_commutes(u, v):
    uv, vu = cheb_product(u, v).coeffs, cheb_product(v, u).coeffs
    assert np.allclose(uv, vu, atol=1e-13)


@given(series_strategy)
def test_cube_preserves_parity(a):
    for offset in (0, 1):
        sided = np.zeros(len(a) + 1)
        sided[offset::2] = a[: len(sided[offset::2])]
        even, odd = nonlinear_w(sided).parity_mass()
        kept, leaked = (odd, even) if offset else (even, odd)
        assert leaked <= 1e-26 * max(kept, 1.0)


@given(series_strategy)
def test_x_derivative_preserves_parity(a):
    for offset in (0, 1):
        sided = np.zeros(len(a) + 1)
        sided[offset::2] = a[: len(sided[offset::2])]
        even, odd = x_deriv_z(sided).parity_mass()
        kept, leaked = (odd, even) if offset else (even, odd)
        assert leaked <= 1e-26 * max(kept, 1.0)


@given(series_strategy, series_strategy,
       st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
def test_x_derivative_is_linear(u, v, c):
    m = max(len(u), len(v))
    u = np.pad(u, (0, m - len(u)))
    v = np.pad(v, (0, m - len(v)))
    lhs = x_deriv_z(u + c * v).coeffs
    rhs_ = x_deriv_z(u).coeffs + c * x_deriv_z(v).coeffs
    scale = max(float(np.max(np.abs(rhs_))), 1.0)
    assert np.allclose(lhs, rhs_, atol=1e-12 * scale)


def test_series_construction_contracts():
    s = ChebSeries.from_map({0: 1.0, 3: -2.0}, N=5)
    assert s.N == 5 and s.coeffs[3] == -2.0
    assert ChebSeries.from_map({}, 4).N == 4
    with pytest.raises(PreconditionError):
        ChebSeries.from_map({-1: 1.0})
    with pytest.raises(PreconditionError):
        ChebSeries.from_map({6: 1.0}, N=3)
    with pytest.raises(PreconditionError):
        ChebSeries(np.zeros(0))
    with pytest.raises(PreconditionError):
        s.padded(2)
    assert np.array_equal(s.padded(9).truncated(5).coeffs, s.coeffs)


def test_parity_mass_splits_total():
    s = ChebSeries(np.arange(1.0, 8.0))
    even, odd = s.parity_mass()
    assert even + odd == pytest.approx(float(np.sum(s.coeffs ** 2)), rel=1e-15)


def test_eval_outside_domain_rejected():
    with pytest.raises(DomainError):
        eval_series(np.array([1.0, 0.5]), 1.5)


def test_state_requires_matching_truncations():
    p = PhysParams(ell=3.5)
    with pytest.raises(PreconditionError):
        EvolState(ChebSeries.zeros(4), ChebSeries.zeros(5), 0.0, p)


def test_vacuum_energy_zero_and_saddle_energy_half_coupling():
    p = PhysParams(ell=3.5)
    zero = ChebSeries.zeros(12)
    ground = ChebSeries.from_map({0: 1.0}, 12)
    e_ground, fl, fr = bondi_energy(EvolState(ground, zero, 0.0, p))
    assert e_ground == pytest.approx(0.0, abs=1e-14)
    assert fl == 0.0 and fr == 0.0
    e_saddle, _, _ = bondi_energy(EvolState(zero, zero, 0.0, p))
    assert e_saddle == pytest.approx(0.5 * p.coupling, rel=1e-13)
