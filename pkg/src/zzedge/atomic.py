"""Single-well atomic problem in 2D: ground state, gap, and hopping integrals.

The well sits at the origin with depth lambda^2 and support in a disc of
radius r0 much smaller than the nearest-neighbor distance 1/sqrt(3).  The
radial Schrodinger operator

    -(1/r) d/dr (r d/dr) + m^2/r^2 + lambda^2 V0(r)

is discretized in flux form on a staggered uniform grid (unknowns at cell
midpoints, fluxes at faces, r0 on a face), which is second-order accurate and
symmetric with respect to the 2D measure r dr.  For the disc well the ground
energy has a semi-analytic characterization as the root of a Bessel-function
matching condition across r = r0, used as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.special
from scipy.interpolate import CubicSpline

from .errors import NoBoundState

WellShape = Literal["disc", "bump"]

# Nearest-neighbor distance of the unit-spaced honeycomb.
NN_DIST = 1.0 / math.sqrt(3.0)
DEFAULT_R0 = 0.18
# Lattice basis used when offsetting well centers by integer cell vectors.
_V1 = np.array([math.sqrt(3.0) / 2.0, 0.5])
_V2 = np.array([0.0, 1.0])
_E = np.array([1.0 / (2.0 * math.sqrt(3.0)), 0.5])  # vB - vA, |_E| = 1/sqrt(3)


@dataclass(frozen=True)
class AtomicWell:
    """Radial well of unit depth supported in {r < r0}."""

    shape: WellShape = "disc"
    r0: float = DEFAULT_R0

    def __post_init__(self):
        if not 0 < self.r0 < 0.33 * NN_DIST:
            raise ValueError(f"r0={self.r0} violates r0 < 0.33/sqrt(3)")

    def profile(self, r: np.ndarray) -> np.ndarray:
        """V0(r) in [-1, 0], zero outside the disc."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = r < self.r0
        if self.shape == "disc":
            out[inside] = -1.0
        else:
            s = r[inside]
            out[inside] = -np.exp(1.0 - self.r0**2 / (self.r0**2 - s * s))
        return out


@dataclass(frozen=True)
class GroundState:
    lam: float
    E0: float
    r: np.ndarray  # midpoint radii
    p0: np.ndarray  # L2(R^2)-normalized, positive
    decay_rate: float  # fitted d(log p0)/dr outside the well
    h: float

    def interpolator(self):
        """Callable r -> p0(r), cubic in log p0, zero beyond the resolved tail."""
        mask = self.p0 > 1e-250
        rs, ps = self.r[mask], np.log(self.p0[mask])
        spline = CubicSpline(rs, ps, extrapolate=False)
        r_lo, r_hi = rs[0], rs[-1]
        p_lo = self.p0[mask][0]

        def ev(r):
            r = np.asarray(r, dtype=float)
            out = np.zeros_like(r)
            core = r < r_lo
            out[core] = p_lo  # flat continuation through the axis cell
            mid = (r >= r_lo) & (r <= r_hi)
            out[mid] = np.exp(spline(r[mid]))
            return out

        return ev


@dataclass(frozen=True)
class HoppingCoefficient:
    lam: float
    rho: float
    quadrature_error_estimate: float


def _radial_tridiagonal(
    well: AtomicWell, lam: float, m: int, h: float, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Symmetrized flux-form tridiagonal (diag, offdiag) for channel m."""
    i = np.arange(1, n + 1)
    r = (i - 0.5) * h  # midpoints; Dirichlet beyond r = n*h
    r_face_r = i * h
    r_face_l = (i - 1) * h
    diag = (r_face_r + r_face_l) / (r * h * h)
    diag += (m * m) / (r * r) + lam * lam * well.profile(r)
    off = -r_face_r[:-1] / (h * h * np.sqrt(r[:-1] * r[1:]))
    return diag, off


def _solve_channel(
    well: AtomicWell, lam: float, m: int, h: float, n: int, nev: int = 2
) -> Tuple[np.ndarray, np.ndarray]:
    diag, off = _radial_tridiagonal(well, lam, m, h, n)
    evals, evecs = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, nev - 1)
    )
    return evals, evecs


def _grid_for(well: AtomicWell, lam: float, h_target: float) -> Tuple[float, int]:
    """Uniform step with r0 on a face; domain radius 8*max(1, 10/lam)."""
    m_in = max(8, int(round(well.r0 / h_target)))
    h = well.r0 / m_in
    R = 8.0 * max(1.0, 10.0 / lam)
    return h, int(math.ceil(R / h))


def ground_state(well: AtomicWell, lam: float, h_target: float = 1.25e-4) -> GroundState:
    """Radial ground state (m = 0) of -Delta + lam^2 V0, L2(R^2)-normalized."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    h, n = _grid_for(well, lam, h_target)
    evals, evecs = _solve_channel(well, lam, 0, h, n, nev=1)
    E0 = float(evals[0])
    if E0 >= -1e-12:
        raise NoBoundState(f"no negative-energy ground state at lam={lam}, r0={well.r0}")
    r = (np.arange(1, n + 1) - 0.5) * h
    # undo the similarity weight sqrt(r), then normalize in 2D
    p0 = evecs[:, 0] / np.sqrt(r)
    if p0[np.argmax(np.abs(p0))] < 0:
        p0 = -p0
    p0 = p0 / math.sqrt(2.0 * math.pi * h * float(np.sum(p0 * p0 * r)))
    # fitted exponential decay rate on the resolved tail outside the well
    lo, hi = 2.0 * well.r0, min(r[-1], 2.0 * well.r0 + 20.0 / lam)
    mask = (r > lo) & (r < hi) & (p0 > 1e-250)
    slope = float(np.polyfit(r[mask], np.log(p0[mask]), 1)[0])
    return GroundState(lam=lam, E0=E0, r=r, p0=p0, decay_rate=slope, h=h)


def bessel_matching_energy(well: AtomicWell, lam: float) -> float:
    """Ground energy of the disc well from the transcendental matching condition.

    Continuity of the logarithmic derivative of the radial solution at r0:
    k J0'(k r0)/J0(k r0) = kappa K0'(kappa r0)/K0(kappa r0) with
    k = sqrt(lam^2 + E), kappa = sqrt(-E).  The ground state is the root with
    k r0 below the first zero of J0.
    """
    if well.shape != "disc":
        raise ValueError("matching oracle applies to the disc well only")
    r0 = well.r0
    j01 = scipy.special.jn_zeros(0, 1)[0]

    def f(E):
        k = math.sqrt(lam * lam + E)
        kap = math.sqrt(-E)
        left = -k * scipy.special.j1(k * r0) / scipy.special.j0(k * r0)
        right = -kap * scipy.special.k1(kap * r0) / scipy.special.k0(kap * r0)
        return left - right

    eps = 1e-9 * lam * lam
    hi = min(-eps, (j01 / r0) ** 2 - lam * lam - eps)
    lo = -lam * lam + eps
    if hi <= lo or f(lo) * f(hi) > 0:
        raise NoBoundState(f"no matching root for lam={lam}, r0={r0}")
    return float(scipy.optimize.brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16))


def spectral_gap(well: AtomicWell, lam: float, h_target: float = 1.25e-4) -> float:
    """E1 - E0 with E1 the next bound level over angular channels 0 and 1.

    When no second bound state exists the gap is to the continuum edge, |E0|.
    """
    h, n = _grid_for(well, lam, h_target)
    ev0, _ = _solve_channel(well, lam, 0, h, n, nev=2)
    ev1, _ = _solve_channel(well, lam, 1, h, n, nev=1)
    E0 = float(ev0[0])
    if E0 >= -1e-12:
        raise NoBoundState(f"no bound state at lam={lam}")
    candidates = [e for e in [float(ev0[1]), float(ev1[0])] if e < -1e-12]
    E1 = min(candidates) if candidates else 0.0
    return E1 - E0


def _disc_quadrature(r0: float, n_radial: int, n_angular: int):
    """Gauss-Legendre x trapezoid nodes/weights for the measure s ds dtheta."""
    xs, ws = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * r0 * (xs + 1.0)
    ws = 0.5 * r0 * ws * s
    theta = 2.0 * math.pi * np.arange(n_angular) / n_angular
    wt = 2.0 * math.pi / n_angular
    S, T = np.meshgrid(s, theta, indexing="ij")
    W = np.outer(ws, np.full(n_angular, wt))
    return S, T, W


def _well_weight(well: AtomicWell, lam: float, s: np.ndarray) -> np.ndarray:
    return lam * lam * np.abs(well.profile(s))


def _pair_integral(
    gs: GroundState,
    well: AtomicWell,
    c1: np.ndarray,
    c2: np.ndarray,
    n_radial: int,
    n_angular: int,
) -> float:
    """Integral of p0(y-c1) lam^2 |V0(y)| p0(y-c2) over the well disc."""
    S, T, W = _disc_quadrature(well.r0, n_radial, n_angular)
    X = S * np.cos(T)
    Y = S * np.sin(T)
    ev = gs.interpolator()
    d1 = np.hypot(X - c1[0], Y - c1[1])
    d2 = np.hypot(X - c2[0], Y - c2[1])
    vals = ev(d1) * _well_weight(well, gs.lam, S) * ev(d2)
    return float(np.sum(W * vals))


def hopping_rho(gs: GroundState, well: AtomicWell) -> HoppingCoefficient:
    """rho = int p0(y) lam^2 |V0(y)| p0(y - e) dy over the well support."""
    origin = np.zeros(2)
    coarse = _pair_integral(gs, well, origin, _E, 48, 64)
    fine = _pair_integral(gs, well, origin, _E, 96, 128)
    return HoppingCoefficient(
        lam=gs.lam, rho=fine, quadrature_error_estimate=abs(fine - coarse)
    )


def overlap_integral(
    gs: GroundState,
    well: AtomicWell,
    sigma: int,
    r: Tuple[int, int],
    sigma2: int,
    r2: Tuple[int, int],
    n_radial: int = 96,
    n_angular: int = 128,
) -> float:
    """General two-center overlap against the well at the origin.

    Centers are sigma*e + r1*v1 + r2*v2 with sigma in {-1, 0, +1}; the
    integrand is p0(y - c1) lam^2 |V0(y)| p0(y - c2).
    """
    if sigma not in (-1, 0, 1) or sigma2 not in (-1, 0, 1):
        raise ValueError("sigma offsets must be in {-1, 0, +1}")
    c1 = sigma * _E + r[0] * _V1 + r[1] * _V2
    c2 = sigma2 * _E + r2[0] * _V1 + r2[1] * _V2
    return _pair_integral(gs, well, c1, c2, n_radial, n_angular)
