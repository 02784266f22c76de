"""Chebyshev coefficient algebra for the hyperboloidal evolution.

In hyperboloidal coordinates tau = t - log cosh r, x = tanh r the field
equation becomes

    W_tautau + 2 x W_taux + W_tau = ((1-x^2) W_x)_x + l(l+1) W (1 - W^2)

on x in [-1, 1], with no boundary conditions: the principal part degenerates
at x = +-1 and smoothness there does all the selecting.  Expanding
W(tau, x) = sum_n a_n(tau) T_n(x) in Chebyshev polynomials turns the
equation into coefficient ODEs

    a_n'' + a_n' + (n^2 - l(l+1)) a_n + z_n(a) + 2 z_n(a') + l(l+1) w_n(a) = 0,

where z(a) are the coefficients of x W_x and w(a) those of W^3.  Both maps
are exact in coefficient space: the product rule T_m T_n = (T_{m+n} +
T_{|m-n|})/2 closes, so no collocation grid or transform is ever needed.
All sums below are evaluated directly (convolutions/correlations); for the
truncation orders of interest fast transforms would buy nothing.

The Bondi-type energy of a state,

    E = integral of (W_tau^2 + (1-x^2) W_x^2 + (l(l+1)/2)(1-W^2)^2)/2 dx,

obeys dE/dtau = -W_tau(-1)^2 - W_tau(1)^2, so it can only leak through the
null boundaries.  bondi_energy returns E together with both instantaneous
boundary fluxes.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DomainError, PreconditionError
from .params import PhysParams

#: relative size of trailing coefficients above which a series is
#: considered under-resolved (used only to warn, never to reject)
TAIL_WARN_FRACTION = 1e-8


def _as_coeffs(u) -> np.ndarray:
    a = np.asarray(getattr(u, "coeffs", u))
    if a.ndim != 1 or a.size == 0:
        raise PreconditionError("coefficient vector must be 1-d and non-empty")
    # complex series arise as linear-mode eigenfunctions; evolution states
    # stay real and enforce that separately
    return a.astype(np.complex128 if np.iscomplexobj(a) else np.float64)


@dataclass(frozen=True)
class ChebSeries:
    """A finite Chebyshev expansion sum_{n=0}^{N} coeffs[n] T_n(x)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @classmethod
    def zeros(cls, N: int) -> "ChebSeries":
        return cls(np.zeros(N + 1))

    @classmethod
    def from_map(cls, entries: dict[int, float], N: int | None = None) -> "ChebSeries":
        """Build a series from a sparse {degree: value} map."""
        if entries and min(entries) < 0:
            raise PreconditionError("negative Chebyshev degree")
        top = max(entries, default=0)
        if N is None:
            N = top
        if top > N:
            raise PreconditionError(f"degree {top} exceeds truncation N={N}")
        a = np.zeros(N + 1)
        for n, v in entries.items():
            a[n] = v
        return cls(a)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def padded(self, N: int) -> "ChebSeries":
        if N + 1 < len(self.coeffs):
            raise PreconditionError("padding cannot shrink a series")
        out = np.zeros(N + 1, dtype=self.coeffs.dtype)
        out[: len(self.coeffs)] = self.coeffs
        return ChebSeries(out)

    def truncated(self, N: int) -> "ChebSeries":
        out = np.zeros(N + 1, dtype=self.coeffs.dtype)
        m = min(N + 1, len(self.coeffs))
        out[:m] = self.coeffs[:m]
        return ChebSeries(out)

    def __call__(self, x):
        return eval_series(self, x)

    def tail_fraction(self, count: int = 3) -> float:
        """max |a_n| over the last `count` entries, relative to max |a|."""
        scale = np.max(np.abs(self.coeffs))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.coeffs[-count:])) / scale)

    def parity_mass(self) -> tuple[float, float]:
        """(even, odd) coefficient mass, each a sum of squared moduli."""
        even = float(np.sum(np.abs(self.coeffs[0::2]) ** 2))
        odd = float(np.sum(np.abs(self.coeffs[1::2]) ** 2))
        return even, odd


@dataclass(frozen=True)
class EvolState:
    """Instantaneous Galerkin state: series for W and for W_tau."""

    a: ChebSeries
    a_dot: ChebSeries
    tau: float
    params: PhysParams

    def __post_init__(self):
        if self.a.N != self.a_dot.N:
            raise PreconditionError("a and a_dot must share one truncation order")
        if np.iscomplexobj(self.a.coeffs) or np.iscomplexobj(self.a_dot.coeffs):
            raise PreconditionError("evolution states must carry real coefficients")

    @property
    def N(self) -> int:
        return self.a.N


# ---------------------------------------------------------------------------
# coefficient-space building blocks (raw ndarray versions)

def _lagsums(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, int]:
    """Cross-correlation sums G(t) = sum_n u[n+t] v[n] as (g, mid), g[mid+t]=G(t)."""
    L = max(len(u), len(v))
    up = np.pad(u, (0, L - len(u)))
    vp = np.pad(v, (0, L - len(v)))
    return np.correlate(up, vp, "full"), L - 1


def _product_coeffs(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the pointwise product, length len(u)+len(v)-1."""
    conv = np.convolve(u, v)                      # sum part: indices m+n
    g, mid = _lagsums(u, v)
    diff = np.zeros_like(conv)                    # difference part: indices |m-n|
    diff[0] = g[mid]
    diff[1:1 + mid] += g[mid + 1:]                # t = 1 .. mid
    diff[1:1 + mid] += g[mid - 1::-1]             # t = -1 .. -mid
    return 0.5 * (conv + diff)


def _cube_coeffs(a: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of W^3, length 3N+1.

    Two product passes regrouped into one convolution and one correlation of
    a with e, where e_s = 2 (W^2)_s; indices that would go negative drop out.
    """
    n = len(a)
    conv = np.convolve(a, a)                      # indices m+n
    g2, mid2 = _lagsums(a, a)
    d = np.zeros_like(conv)                       # indices |m-n|
    d[0] = g2[mid2]
    d[1:n] = 2.0 * g2[mid2 + 1:]
    e = conv + d                                  # e_s = 2 (W^2)_s for s >= 0
    w = np.convolve(a, e)                         # terms a_{k-s} e_s
    g, mid = _lagsums(a, e)                       # G(t) = sum_s a[s+t] e_s
    w[1:1 + mid] += g[mid + 1:]                   # terms a_{k+s} e_s
    w[1:1 + mid] += g[mid - 1::-1]                # terms a_{s-k} e_s
    w *= 0.25
    w[0] = 0.25 * (a[0] ** 3 + a[0] * np.dot(a, a) + np.dot(a, e[:n]))
    return w


@lru_cache(maxsize=None)
def _zmat(N: int) -> np.ndarray:
    """Matrix of a |-> coefficients of x W_x at truncation N.

    Row 0 collects 2j a_{2j}; row k>0 is k a_k + 2 sum_j (k+2j) a_{k+2j},
    stepping by two so parity is preserved.
    """
    Z = np.zeros((N + 1, N + 1))
    for j in range(2, N + 1, 2):
        Z[0, j] = j
    for k in range(1, N + 1):
        Z[k, k] = k
        for m in range(k + 2, N + 1, 2):
            Z[k, m] = 2 * m
    Z.setflags(write=False)
    return Z


@lru_cache(maxsize=None)
def _gauss_nodes(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _accel(a: np.ndarray, a_dot: np.ndarray, lam: float, Z: np.ndarray) -> np.ndarray:
    """a'' for the coefficient ODEs (raw arrays, used inside integrators)."""
    N = len(a) - 1
    n2 = np.arange(N + 1, dtype=float) ** 2
    w = _cube_coeffs(a)[: N + 1]
    return -(a_dot + (n2 - lam) * a + Z @ a + 2.0 * (Z @ a_dot) + lam * w)


# ---------------------------------------------------------------------------
# public operations

def cheb_product(u: ChebSeries | np.ndarray, v: ChebSeries | np.ndarray) -> ChebSeries:
    """Exact product of two Chebyshev series (no truncation)."""
    return ChebSeries(_product_coeffs(_as_coeffs(u), _as_coeffs(v)))


def nonlinear_w(a: ChebSeries | np.ndarray) -> ChebSeries:
    """Exact Chebyshev coefficients of W^3 for W with coefficients a."""
    return ChebSeries(_cube_coeffs(_as_coeffs(a)))


def x_deriv_z(a: ChebSeries | np.ndarray) -> ChebSeries:
    """Coefficients of x W_x at the truncation order of the input."""
    arr = _as_coeffs(a)
    return ChebSeries(_zmat(len(arr) - 1) @ arr)


def rhs(state: EvolState) -> ChebSeries:
    """Second tau-derivative of the coefficient vector at the given state."""
    a = state.a.coeffs
    return ChebSeries(_accel(a, state.a_dot.coeffs, state.params.coupling,
                             _zmat(len(a) - 1)))


def eval_series(a: ChebSeries | np.ndarray, x) -> np.ndarray | float:
    """Evaluate a Chebyshev series on points of [-1, 1]."""
    arr = _as_coeffs(a)
    xs = np.asarray(x, dtype=float)
    if np.any(np.abs(xs) > 1.0 + 1e-12):
        raise DomainError("evaluation point outside [-1, 1]")
    out = C.chebval(np.clip(xs, -1.0, 1.0), arr)
    if np.isscalar(x) or xs.ndim == 0:
        return complex(out) if np.iscomplexobj(arr) else float(out)
    return out


def quad_nodes(N: int, extra: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights exact for the quartic density at order N."""
    return _gauss_nodes(2 * N + 2 + extra)


def bondi_energy(state: EvolState) -> tuple[float, float, float]:
    """Energy of a state and the instantaneous boundary fluxes.

    Returns (E, flux_left, flux_right); the balance law is
    dE/dtau = -(flux_left + flux_right), both fluxes nonnegative.
    """
    a = state.a.coeffs
    ad = state.a_dot.coeffs
    lam = state.params.coupling
    x, wq = quad_nodes(state.N)
    W = C.chebval(x, a)
    Wt = C.chebval(x, ad)
    Wx = C.chebval(x, C.chebder(a)) if len(a) > 1 else np.zeros_like(x)
    rho = 0.5 * (Wt ** 2 + (1.0 - x ** 2) * Wx ** 2 + 0.5 * lam * (1.0 - W ** 2) ** 2)
    energy = float(wq @ rho)
    flux_left = float(C.chebval(-1.0, ad) ** 2)
    flux_right = float(C.chebval(1.0, ad) ** 2)
    return energy, flux_left, flux_right


def warn_if_underresolved(a: ChebSeries, context: str) -> None:
    frac = a.tail_fraction()
    if frac > TAIL_WARN_FRACTION:
        warnings.warn(
            f"{context}: trailing coefficients at {frac:.2e} of the maximum; "
            "increase the truncation order",
            stacklevel=3,
        )
