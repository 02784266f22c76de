import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wormym.errors import IntegerEllError, PreconditionError
from wormym.params import PhysParams


def test_coupling_and_alpha():
    p = PhysParams(ell=3.5)
    assert p.coupling == 3.5 * 4.5
    assert p.alpha == pytest.approx(1.0 / math.sqrt(15.75), rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_rejects_nonpositive_ell(bad):
    with pytest.raises(PreconditionError):
        PhysParams(ell=bad)


def test_integer_detection():
    assert PhysParams(ell=3.0).is_integer
    assert PhysParams(ell=3.0 + 1e-12).is_integer
    assert not PhysParams(ell=3.5).is_integer
    with pytest.raises(IntegerEllError):
        PhysParams(ell=2.0).require_noninteger("test")
    PhysParams(ell=2.5).require_noninteger("test")


@given(st.floats(min_value=0.05, max_value=50.0,
                 allow_nan=False, allow_infinity=False))
def test_coupling_fixes_curvature_scale(ell):
    p = PhysParams(ell=ell)
    assert p.coupling * p.alpha ** 2 == pytest.approx(1.0, rel=1e-12)
