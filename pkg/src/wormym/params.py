"""Physical parameters of the model.

The field equation on the wormhole reads, in areal-type coordinates,

    W_tt = W_rr + l(l+1) sech^2(r) W (1 - W^2),   r in (-inf, inf),

so a single positive number l (not necessarily an integer) fixes the model;
l(l+1) equals 1/alpha^2 where alpha is the curvature scale of the asymptotic
hyperbolic ends.  Integer l is a bifurcation point of the static catalogue
and most routines refuse it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IntegerEllError, PreconditionError

#: tolerance below which ell counts as an integer
INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class PhysParams:
    """Model parameters: the angular-momentum-like coupling ell."""

    ell: float

    def __post_init__(self):
        if not (math.isfinite(self.ell) and self.ell > 0):
            raise PreconditionError(f"ell must be finite and positive, got {self.ell}")

    @property
    def coupling(self) -> float:
        """Strength l(l+1) of the sech^2 potential."""
        return self.ell * (self.ell + 1.0)

    @property
    def alpha(self) -> float:
        """Curvature scale of the asymptotic ends, 1/sqrt(l(l+1))."""
        return 1.0 / math.sqrt(self.coupling)

    @property
    def is_integer(self) -> bool:
        return abs(self.ell - round(self.ell)) < INTEGER_TOL

    def require_noninteger(self, context: str = "") -> None:
        if self.is_integer:
            where = f" ({context})" if context else ""
            raise IntegerEllError(
                f"ell = {self.ell} is an integer bifurcation point{where}; "
                "perturb ell away from the integers"
            )
