"""Honeycomb geometry for the zigzag half-space and the per-kpar scalar functions.

All lengths are in lattice units: |v1| = |v2| = 1, nearest-neighbor distance
|e| = 1/sqrt(3).  Everything here is exact closed-form arithmetic; the rest of
the package consumes these values and never re-derives geometry.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, List, Literal

import numpy as np

Sublattice = Literal["A", "B"]


@dataclass(frozen=True)
class LatticeFrame:
    """Basis vectors of the triangular lattice, its dual, and sublattice offsets."""

    v1: np.ndarray
    v2: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    vA: np.ndarray
    vB: np.ndarray
    e: np.ndarray  # vB - vA, nearest-neighbor vector


@dataclass(frozen=True)
class SpectralWindow:
    """Per-kpar spectral bookkeeping: zeta, band gap and band maximum."""

    kpar: float
    zeta: complex
    dgap: float
    dmax: float


@dataclass(frozen=True)
class SiteIndex:
    """Site of the half-space structure: sublattice label plus cell indices.

    The site lies in the truncated structure exactly when n1 >= 0.
    """

    sublattice: Sublattice
    n1: int
    n2: int


def make_frame() -> LatticeFrame:
    """Build the canonical frame: v1 = (sqrt(3)/2, 1/2), v2 = (0, 1)."""
    s3 = math.sqrt(3.0)
    v1 = np.array([s3 / 2.0, 0.5])
    v2 = np.array([0.0, 1.0])
    K1 = 2.0 * math.pi * np.array([2.0 * s3 / 3.0, 0.0])
    K2 = 2.0 * math.pi * np.array([-s3 / 3.0, 1.0])
    vA = np.array([0.0, 0.0])
    # vB is the centroid (v1 + v2)/3, so its three neighbors vA, vA + v1 and
    # vA + v2 are all at the nearest-neighbor distance 1/sqrt(3).
    vB = np.array([1.0 / (2.0 * s3), 0.5])
    return LatticeFrame(v1=v1, v2=v2, K1=K1, K2=K2, vA=vA, vB=vB, e=vB - vA)


def spectral_window(kpar: float) -> SpectralWindow:
    """zeta = 1 + exp(i kpar), dgap = |1 - |zeta||, dmax = 1 + |zeta|."""
    zeta = 1.0 + cmath.exp(1j * kpar)
    az = abs(zeta)
    return SpectralWindow(kpar=kpar, zeta=zeta, dgap=abs(1.0 - az), dmax=1.0 + az)


def site_position(frame: LatticeFrame, s: SiteIndex) -> np.ndarray:
    """Position v_I + n1*v1 + n2*v2 of a site."""
    base = frame.vA if s.sublattice == "A" else frame.vB
    return base + s.n1 * frame.v1 + s.n2 * frame.v2


def enumerate_sharp_sites(
    frame: LatticeFrame, n1_max: int, n2_window: Iterable[int]
) -> List[SiteIndex]:
    """All half-space sites with 0 <= n1 <= n1_max and n2 in the given window.

    Ordering is by cell (n1, n2), A before B, so the count is
    2 * (n1_max + 1) * len(window).
    """
    if n1_max < 0:
        raise ValueError("n1_max must be >= 0")
    n2s = list(n2_window)
    sites: List[SiteIndex] = []
    for n1 in range(n1_max + 1):
        for n2 in n2s:
            sites.append(SiteIndex("A", n1, n2))
            sites.append(SiteIndex("B", n1, n2))
    return sites
