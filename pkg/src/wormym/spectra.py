"""Linear modes around the static solutions.

Perturbations W = W_bg + u(x) e^{lam tau} of the hyperboloidal equation obey
a quadratic operator pencil

    (A + lam B + lam^2) u = 0,
    A = -d_x((1 - x^2) d_x) + l(l+1) (3 W_bg^2 - 1),     B = 2 x d_x + 1.

On the constant backgrounds the pencil closes on monomials: the power-series
ansatz u = sum_j c_j x^j gives the two-step recurrence

    (j+2)(j+1) c_{j+2} = [lam^2 + (2j+1) lam + j^2 + j + kappa] c_j

with kappa = -l(l+1) on W = 0 and kappa = +2 l(l+1) on W = 1, and requiring
the series to terminate at degree j yields two eigenvalue sequences per
degree together with polynomial eigenfunctions.  Around the nonconstant
solutions the pencil is assembled in the Chebyshev basis and solved by
companion linearization; spurious eigenvalues are removed by keeping only
those that agree between two truncation orders.

The self-adjoint side of the stability question lives on the r-line:
L_n = -d_rr + V_n with V_n = l(l+1) sech^2(r) (3 W_n^2 - 1).  Negative
eigenvalues of L_n are counted by Sturm oscillation of the zero-energy
solution, and the exact eigenpair sigma = -1, v_n = cosh(r) W_n'(r) gives a
finite-difference consistency check on any computed profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.polynomial.chebyshev as C
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import DomainError, PreconditionError, ResolutionError
from .galerkin import ChebSeries, _product_coeffs, _zmat
from .params import PhysParams
from .statics import DEFAULT_R_MAX, StaticProfile, enumerate_statics, to_cheb

FILTER_MARGIN = 1e-6
RESOLUTION_STEP = 10          # the companion filter compares M against M + this
PARITY_TOL = 1e-8             # wrong-parity mass fraction that still counts as pure
PENCIL_TAIL_TOL = 1e-8        # background must be resolved to this at truncation M
DEFAULT_PENCIL_M = 40
NODE_RTOL = 1e-10
NODE_ATOL = 1e-12


# ---------------------------------------------------------------------------
# mode containers

@dataclass(frozen=True)
class Mode:
    """One linear mode: eigenvalue, parity sector, and provenance.

    source is 'closed_form' (termination recurrence on a constant
    background), 'pencil' (filtered companion eigenvalue), or 'ringdown_fit'
    (extracted from an evolution).  eigenfunction, when present, is the
    Chebyshev series of u(x); it is complex when lam is.
    """

    lam: complex
    parity: str
    source: str
    eigenfunction: ChebSeries | None = None

    @property
    def is_unstable(self) -> bool:
        return self.lam.real > 0.0


def _mode_order(mode: Mode):
    lam = mode.lam
    return (-lam.real, abs(lam.imag), -lam.imag, mode.parity)


@dataclass(frozen=True)
class ModeSet:
    """Modes over one background, ordered by descending real part.

    Conjugate partners sit adjacent (positive imaginary part first), so real
    unstable eigenvalues lead and damped modes follow in order of decay rate.
    """

    background: str
    params: PhysParams | None
    modes: tuple[Mode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(sorted(self.modes, key=_mode_order)))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    @property
    def unstable_count(self) -> int:
        return sum(1 for m in self.modes if m.is_unstable)

    def eigenvalues(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes], dtype=complex)

    def closest(self, lam: complex) -> Mode:
        """The mode whose eigenvalue is nearest to lam."""
        if not self.modes:
            raise PreconditionError("empty mode set")
        return min(self.modes, key=lambda m: abs(m.lam - lam))


# ---------------------------------------------------------------------------
# closed-form spectra on the constant backgrounds

def _recurrence_kappa(which: str, coupling: float) -> float:
    # potential term l(l+1)(3 W^2 - 1) evaluated on the constant
    return 2.0 * coupling if which == "ground" else -coupling


def _closed_eigenvalue(which: str, params: PhysParams, j: int, sign: int) -> complex:
    if which == "star":
        return complex(-j - 0.5 + sign * (params.ell + 0.5))
    disc = 1.0 - 8.0 * params.coupling
    if disc >= 0.0:
        return complex(-j - 0.5 + sign * 0.5 * math.sqrt(disc))
    return complex(-j - 0.5, sign * 0.5 * math.sqrt(-disc))


def _closed_eigenfunction(which: str, params: PhysParams, j: int,
                          lam: complex) -> ChebSeries:
    kappa = _recurrence_kappa(which, params.coupling)
    real = lam.imag == 0.0
    c = np.zeros(j + 1, dtype=float if real else complex)
    lam = lam.real if real else lam
    c[j % 2] = 1.0
    for i in range(j % 2, j - 1, 2):
        c[i + 2] = (lam * lam + (2 * i + 1) * lam + i * i + i + kappa) * c[i] \
            / ((i + 2) * (i + 1))
    return ChebSeries(C.poly2cheb(c))


def closed_spectrum(which: str, params: PhysParams, j_max: int) -> ModeSet:
    """Exact mode set of a constant background up to recurrence degree j_max.

    which selects the background: 'star' is W = 0, 'ground' is W = 1.  Each
    degree j contributes the two eigenvalues solving the termination
    condition, -j - 1/2 +- (l + 1/2) on the star and
    -j - 1/2 +- sqrt(1 - 8 l(l+1))/2 on the ground state, with polynomial
    eigenfunctions of degree j and the parity of j.
    """
    if which not in ("star", "ground"):
        raise PreconditionError(f"unknown constant background {which!r}")
    if j_max < 0:
        raise PreconditionError("j_max must be nonnegative")
    modes = []
    for j in range(j_max + 1):
        parity = "even" if j % 2 == 0 else "odd"
        for sign in (1, -1):
            lam = _closed_eigenvalue(which, params, j, sign)
            u = _closed_eigenfunction(which, params, j, lam)
            modes.append(Mode(lam, parity, "closed_form", u))
    return ModeSet(which, params, tuple(modes))


# ---------------------------------------------------------------------------
# quadratic pencil on a general background

def _mult_matrix(g: np.ndarray, M: int) -> np.ndarray:
    """Truncated matrix of multiplication by the series g in the T_n basis."""
    out = np.zeros((M + 1, M + 1))
    for m in range(M + 1):
        unit = np.zeros(m + 1)
        unit[m] = 1.0
        col = _product_coeffs(g, unit)
        keep = min(len(col), M + 1)
        out[:keep, m] = col[:keep]
    return out


def pencil_matrices(background: ChebSeries | np.ndarray, params: PhysParams,
                    M: int) -> tuple[np.ndarray, np.ndarray]:
    """Order-(M+1) Chebyshev matrices (A, B) of the pencil on a background.

    A represents -d_x((1-x^2) d_x) + l(l+1)(3 W^2 - 1) and B represents
    2 x d_x + 1.  The background series must be resolved at truncation M:
    its relative tail (and anything beyond degree M) must sit below 1e-8.
    """
    bg = background if isinstance(background, ChebSeries) else ChebSeries(background)
    if M < 1:
        raise PreconditionError("pencil truncation must be at least 1")
    a = bg.coeffs
    scale = float(np.max(np.abs(a)))
    spill = float(np.max(np.abs(a[M + 1:]))) if len(a) > M + 1 else 0.0
    kept = bg.truncated(M)
    if scale > 0.0 and max(spill / scale, kept.tail_fraction()) > PENCIL_TAIL_TOL:
        raise PreconditionError(
            f"background series not resolved at truncation {M}")
    lam = params.coupling
    w2 = _product_coeffs(kept.coeffs, kept.coeffs)
    g = 3.0 * lam * w2
    g[0] -= lam
    Z = _zmat(M)
    A = np.diag(np.arange(M + 1, dtype=float) ** 2) + Z + _mult_matrix(g, M)
    B = np.eye(M + 1) + 2.0 * Z
    return A, B


def _companion_eigen(A: np.ndarray, B: np.ndarray):
    # scaling the identity block by sqrt(|A|) balances the companion matrix
    # and keeps deep eigenvalues accurate despite its non-normality
    n = A.shape[0]
    gamma = max(1.0, math.sqrt(np.linalg.norm(A, 2)))
    comp = np.zeros((2 * n, 2 * n))
    comp[:n, n:] = gamma * np.eye(n)
    comp[n:, :n] = -A / gamma
    comp[n:, n:] = -B
    vals, vecs = np.linalg.eig(comp)
    return vals, vecs[:n, :]


def _as_matrix_pair(M, name: str):
    try:
        first, second = M
    except (TypeError, ValueError):
        raise PreconditionError(
            f"{name} must be a pair of matrices from two truncation orders")
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    for mat in (first, second):
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise PreconditionError(f"{name} entries must be square matrices")
    if second.shape[0] <= first.shape[0]:
        raise PreconditionError(f"second {name} must use the finer truncation")
    return first, second


def _normalized_eigvec(u: np.ndarray) -> np.ndarray:
    pivot = u[int(np.argmax(np.abs(u)))]
    u = u / pivot
    if np.max(np.abs(u.imag)) <= 1e-10 * np.max(np.abs(u.real)):
        return u.real.copy()
    return u


def pencil_eigen(A, B, filter_margin: float = FILTER_MARGIN, *,
                 params: PhysParams | None = None,
                 background: str = "pencil") -> ModeSet:
    """Filtered spectrum of the pencil from matrices at two truncations.

    A and B are pairs (coarse, fine) built by pencil_matrices at orders M and
    M' > M.  Each truncation is linearized to the companion form
    [[0, I], [-A, -B]] and solved densely; an eigenvalue of the coarse
    problem survives only if the fine problem has an eigenvalue within
    filter_margin of it.  Parity is read off the eigenvector coefficient
    support; a surviving mode with mixed support means the truncation cannot
    separate the sectors, as does an empty surviving set.
    """
    A1, A2 = _as_matrix_pair(A, "A")
    B1, B2 = _as_matrix_pair(B, "B")
    if A1.shape != B1.shape or A2.shape != B2.shape:
        raise PreconditionError("A and B truncation orders disagree")
    vals1, vecs1 = _companion_eigen(A1, B1)
    vals2, _ = _companion_eigen(A2, B2)
    modes = []
    for k in range(len(vals1)):
        lam = vals1[k]
        if np.min(np.abs(vals2 - lam)) >= filter_margin:
            continue
        u = _normalized_eigvec(vecs1[:, k])
        even = float(np.sum(np.abs(u[0::2]) ** 2))
        odd = float(np.sum(np.abs(u[1::2]) ** 2))
        if min(even, odd) > PARITY_TOL * (even + odd):
            raise ResolutionError(
                f"mode {lam:.6g} has mixed parity support; raise the truncation")
        modes.append(Mode(complex(lam), "even" if even >= odd else "odd",
                          "pencil", ChebSeries(u)))
    if not modes:
        raise ResolutionError(
            "no eigenvalue agreed between the two truncations; raise M")
    return ModeSet(background, params, tuple(modes))


def pencil_spectrum(profile: StaticProfile, M: int = DEFAULT_PENCIL_M,
                    filter_margin: float = FILTER_MARGIN,
                    step: int = RESOLUTION_STEP) -> ModeSet:
    """Filtered pencil spectrum of a static profile.

    Convenience wrapper: expands the profile in Chebyshev series at
    truncations M and M + step, assembles both pencils, and filters.  The
    background label follows the profile ('ground' for the vacuum, 'star'
    for the saddle, 'Wn' otherwise).
    """
    label = {"vacuum": "ground", "saddle": "star"}.get(profile.kind,
                                                       f"W{profile.n}")
    if profile.is_constant:
        coarse = ChebSeries.from_map({0: profile.w_inf}, N=M)
        fine = ChebSeries.from_map({0: profile.w_inf}, N=M + step)
    else:
        coarse = to_cheb(profile, M)
        fine = to_cheb(profile, M + step)
    A1, B1 = pencil_matrices(coarse, profile.params, M)
    A2, B2 = pencil_matrices(fine, profile.params, M + step)
    return pencil_eigen((A1, A2), (B1, B2), filter_margin,
                        params=profile.params, background=label)


# ---------------------------------------------------------------------------
# self-adjoint operator L_n = -d_rr + V_n on the r-line

def _potential(profile: StaticProfile):
    lam = profile.params.coupling
    spline = CubicSpline(profile.r, profile.w)

    def V(r):
        w = spline(r)
        return lam * (3.0 * w * w - 1.0) / np.cosh(r) ** 2

    return V


def schrodinger_negative_count(profile: StaticProfile) -> int:
    """Number of negative eigenvalues of L_n = -d_rr + V_n.

    The vacuum potential is positive (count 0) and the saddle potential is
    an exact scattering well with ceil(l) bound states; those two are
    returned in closed form.  Otherwise the zero-energy solution that is
    bounded on the left is integrated across the profile's range and its
    nodes are counted (Sturm oscillation), including the one the linear
    asymptote still owes when the solution leaves the grid heading for a
    crossing.
    """
    if profile.kind == "vacuum":
        return 0
    if profile.kind == "saddle":
        return math.ceil(profile.params.ell)
    V = _potential(profile)

    def rhs(r, y):
        return (y[1], V(r) * y[0])

    r_lo, r_hi = float(profile.r[0]), float(profile.r[-1])
    sol = solve_ivp(rhs, (r_lo, r_hi), (1.0, 0.0), method="DOP853",
                    rtol=NODE_RTOL, atol=NODE_ATOL, dense_output=True)
    if not sol.success:
        raise ResolutionError(f"zero-energy sweep failed: {sol.message}")
    samples = sol.sol(np.linspace(r_lo, r_hi, 20001))[0]
    signs = np.sign(samples)
    signs = signs[signs != 0.0]
    count = int(np.sum(signs[1:] != signs[:-1]))
    u, up = sol.y[:, -1]
    if u * up < 0.0:
        count += 1
    return count


def sigma_minus_one_check(profile: StaticProfile) -> float:
    """Sup-norm residual of the exact eigenrelation L_n v + v = 0.

    v = cosh(r) W'(r) is an eigenfunction of L_n with eigenvalue -1 for any
    solution of the static equation, so applying a sixth-order finite
    difference to the stored samples measures their pointwise consistency.
    Constant profiles have v identically zero and return 0.
    """
    if profile.is_constant:
        return 0.0
    r = profile.r
    h = float(r[1] - r[0])
    v = np.cosh(r) * profile.wprime
    lam = profile.params.coupling
    U = lam * (3.0 * profile.w ** 2 - 1.0) / np.cosh(r) ** 2
    vpp = (2.0 * (v[:-6] + v[6:]) - 27.0 * (v[1:-5] + v[5:-1])
           + 270.0 * (v[2:-4] + v[4:-2]) - 490.0 * v[3:-3]) / (180.0 * h * h)
    res = -vpp + (U[3:-3] + 1.0) * v[3:-3]
    return float(np.max(np.abs(res)))


def eigenfunction_node_count(profile: StaticProfile) -> int:
    """Interior zeros of v = cosh(r) W', ignoring the decaying tails."""
    if profile.is_constant:
        return 0
    v = np.cosh(profile.r) * profile.wprime
    floor = 1e-8 * np.max(np.abs(v))
    signs = np.sign(np.where(np.abs(v) > floor, v, 0.0))
    signs = signs[signs != 0.0]
    return int(np.sum(signs[1:] != signs[:-1]))


def wronskian_mismatch(profile: StaticProfile, sigma: float) -> float:
    """Matching defect of L_n at energy sigma < 0; zero iff an eigenvalue.

    Integrates the solutions decaying at each end toward r = 0 and returns
    their (normalized) Wronskian there, so a sign change between two sigma
    values brackets an eigenvalue of L_n.
    """
    if sigma >= 0.0:
        raise DomainError("bound-state search requires sigma < 0")
    if profile.is_constant:
        raise PreconditionError("matching defect needs a sampled potential")
    kappa = math.sqrt(-sigma)
    V = _potential(profile)

    def rhs(r, y):
        return (y[1], (V(r) - sigma) * y[0])

    r_end = float(profile.r[-1])
    left = solve_ivp(rhs, (-r_end, 0.0), (1.0, kappa), method="DOP853",
                     rtol=NODE_RTOL, atol=NODE_ATOL)
    right = solve_ivp(rhs, (r_end, 0.0), (1.0, -kappa), method="DOP853",
                      rtol=NODE_RTOL, atol=NODE_ATOL)
    if not (left.success and right.success):
        raise ResolutionError("bound-state sweep failed")
    uL, upL = left.y[:, -1]
    uR, upR = right.y[:, -1]
    scale = math.hypot(uL, upL / kappa) * math.hypot(uR, upR / kappa)
    return float((uL * upR - upL * uR) / scale)


# ---------------------------------------------------------------------------
# Morse index bookkeeping

class MorseCheck(NamedTuple):
    morse_index_star: int
    nonconstant_static_count: int

    @property
    def consistent(self) -> bool:
        # index of the saddle exceeds the count of lower critical points by one
        return self.morse_index_star == self.nonconstant_static_count + 1


def morse_check(params: PhysParams, r_max: float = DEFAULT_R_MAX) -> MorseCheck:
    """Saddle Morse index against the census of nonconstant solutions.

    The index is the closed-form negative-eigenvalue count ceil(l) of the
    saddle operator; the census counts the W_n delivered by
    enumerate_statics, one per sign pair.
    """
    params.require_noninteger()
    statics = enumerate_statics(params, r_max)
    excited = sum(1 for p in statics if p.kind == "excited")
    return MorseCheck(math.ceil(params.ell), excited)
