"""Discrete zigzag-edge Hamiltonian on the half-line of dimer cells.

Conventions: a state is an (N, 2) complex array, column 0 holding the A-site
amplitudes and column 1 the B-site amplitudes of cells n = 0..N-1.  The dense
matrix representation interleaves them as (psi_0^A, psi_0^B, psi_1^A, ...).

The semi-infinite operator couples, for fixed parallel momentum kpar with
zeta = 1 + exp(i kpar):

    (H psi)_n^A = psi_{n-1}^B + conj(zeta) psi_n^B
    (H psi)_n^B = psi_{n+1}^A +      zeta  psi_n^A

Truncation to N cells keeps exactly the rows/columns with 0 <= n < N.  The
finite chain then carries a second near-zero mode glued to the artificial
right end whenever |zeta| < 1; classification by left/right mass separates it
from the physical edge state (see `classify_modes`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateFiber,
    EigensolverError,
    NoEdgeState,
    OnEssentialSpectrum,
    PoleAtZero,
)
from .lattice import SpectralWindow, spectral_window

Regime = Literal["InsideGap", "AboveBands", "OnBands"]
EdgeFlag = Literal["left", "right", "none"]

# Tolerance inflating the essential band when testing membership.
BAND_TOL = 1e-9
# |zeta| below which kpar is treated as the degenerate pi fiber.
ZETA_DEGENERATE = 1e-13


@dataclass(frozen=True)
class FiberOperator:
    """Truncated edge fiber: 2N x 2N Hermitian matrix for N cells."""

    window: SpectralWindow
    ncells: int
    matrix: np.ndarray


@dataclass(frozen=True)
class EdgeState:
    """Normalized flat-band eigenstate, exact up to the truncation tail."""

    window: SpectralWindow
    amplitudes: np.ndarray  # (N, 2), column 1 identically zero
    norm: float


@dataclass(frozen=True)
class TransferSystem:
    """2x2 cell-to-cell transfer matrix at spectral parameter z, with eigendata."""

    z: complex
    window: SpectralWindow
    M: np.ndarray
    lam1: complex
    lam2: complex
    xi1: np.ndarray
    xi2: np.ndarray
    regime: Regime


def apply_bulk_fiber(
    psi: np.ndarray, window: SpectralWindow, n_start: int = 0
) -> Tuple[np.ndarray, int]:
    """Apply the bulk fiber Hamiltonian to a finitely supported state.

    `psi` has shape (L, 2) and represents cells n_start..n_start+L-1.  The
    output window grows by one cell on each side; returns (out, n_start-1).
    """
    psi = np.asarray(psi, dtype=complex)
    L = psi.shape[0]
    zeta = window.zeta
    ext = np.zeros((L + 2, 2), dtype=complex)
    ext[1 : L + 1] = psi
    out = np.zeros_like(ext)
    # A row: psi_{n-1}^B + conj(zeta) psi_n^B
    out[1:, 0] = ext[:-1, 1]
    out[:, 0] += np.conj(zeta) * ext[:, 1]
    # B row: psi_{n+1}^A + zeta psi_n^A
    out[:-1, 1] = ext[1:, 0]
    out[:, 1] += zeta * ext[:, 0]
    return out, n_start - 1


def build_fiber(window: SpectralWindow, ncells: int) -> FiberOperator:
    """Truncated 2N x 2N edge fiber matrix in the interleaved basis."""
    if ncells < 2:
        raise ValueError("ncells must be >= 2")
    N = ncells
    zeta = window.zeta
    H = np.zeros((2 * N, 2 * N), dtype=complex)
    for n in range(N):
        a, b = 2 * n, 2 * n + 1
        H[a, b] = np.conj(zeta)
        H[b, a] = zeta
        if n >= 1:
            H[a, b - 2] = 1.0  # couples to psi_{n-1}^B
            H[b - 2, a] = 1.0
    return FiberOperator(window=window, ncells=N, matrix=H)


def spectrum(op: FiberOperator) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of the truncation."""
    try:
        evals, evecs = scipy.linalg.eigh(op.matrix)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    scale = max(np.linalg.norm(op.matrix, ord=np.inf), 1.0)
    res = np.linalg.norm(op.matrix @ evecs - evecs * evals, axis=0)
    if np.max(res) > 1e-10 * scale:  # pragma: no cover
        raise EigensolverError(f"eigenpair residual {np.max(res):.3e} exceeds tolerance")
    return evals, evecs


def flat_band_state(window: SpectralWindow, ncells: int) -> EdgeState:
    """Closed-form zero-energy edge state, truncated to N cells.

    A-amplitudes sqrt(1 - |zeta|^2) (-zeta)^n, B identically zero.  Raises
    NoEdgeState for |zeta| >= 1 where the point spectrum is empty.
    """
    zeta = window.zeta
    if abs(zeta) >= 1.0:
        raise NoEdgeState(f"no flat-band state at kpar={window.kpar:.6g}: |zeta|={abs(zeta):.4f} >= 1")
    amp = np.zeros((ncells, 2), dtype=complex)
    amp[:, 0] = math.sqrt(1.0 - abs(zeta) ** 2) * (-zeta) ** np.arange(ncells)
    return EdgeState(window=window, amplitudes=amp, norm=float(np.linalg.norm(amp)))


def _regime(z: complex, window: SpectralWindow) -> Regime:
    x = abs(z.real) if isinstance(z, complex) else abs(z)
    if x < window.dgap - BAND_TOL:
        return "InsideGap"
    if x > window.dmax + BAND_TOL:
        return "AboveBands"
    return "OnBands"


def transfer_system(z: complex, window: SpectralWindow) -> TransferSystem:
    """Transfer matrix M(z, zeta), its eigenpairs and spectral regime."""
    zeta = window.zeta
    if abs(zeta) < ZETA_DEGENERATE:
        raise DegenerateFiber("kpar = pi: zeta = 0, transfer matrix undefined")
    z = complex(z)
    zc = np.conj(zeta)
    M = np.array(
        [[-zeta, z], [-(zeta / zc) * z, (z * z - 1.0) / zc]],
        dtype=complex,
    )
    b = 1.0 + abs(zeta) ** 2 - z * z
    disc = cmath.sqrt(b * b - 4.0 * abs(zeta) ** 2)
    lam1 = (-b + disc) / (2.0 * zc)
    lam2 = (-b - disc) / (2.0 * zc)
    xi1 = np.array([z, zeta + lam1], dtype=complex)
    xi2 = np.array([z, zeta + lam2], dtype=complex)
    return TransferSystem(
        z=z, window=window, M=M, lam1=lam1, lam2=lam2, xi1=xi1, xi2=xi2,
        regime=_regime(z, window),
    )


def _resolve_pi(f: np.ndarray, z: complex) -> np.ndarray:
    """Block solve at kpar = pi: 1x1 zero block then sigma_1 pairs (B_n, A_{n+1})."""
    if min(abs(z), abs(z - 1.0), abs(z + 1.0)) < 1e-12:
        raise PoleAtZero(f"z={z} is a resolvent pole of the pi fiber (poles at 0, +1, -1)")
    N = f.shape[0]
    psi = np.zeros((N, 2), dtype=complex)
    psi[0, 0] = -f[0, 0] / z
    d = z * z - 1.0
    for n in range(N):
        fb = f[n, 1]
        fa1 = f[n + 1, 0] if n + 1 < N else 0.0
        # invert [[-z, 1], [1, -z]] on (fb, fa1)
        psi[n, 1] = (-z * fb - fa1) / d
        if n + 1 < N:
            psi[n + 1, 0] = (-fb - z * fa1) / d
    return psi


def resolve(
    f: np.ndarray, z: complex, window: SpectralWindow, ncells: int
) -> np.ndarray:
    """Solve (H_edge(kpar) - z) psi = f on the half-line via the transfer matrix.

    `f` must be supported on cells 0..ncells-1 (shape (ncells, 2)); the
    returned psi covers the same cells of the decaying semi-infinite solution.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (ncells, 2):
        raise ValueError("f must have shape (ncells, 2)")
    z = complex(z)
    zeta = window.zeta
    if abs(zeta) < ZETA_DEGENERATE:
        return _resolve_pi(f, z)
    if abs(z.imag) < BAND_TOL and _regime(z, window) == "OnBands":
        raise OnEssentialSpectrum(
            f"z={z} lies in the essential band [{window.dgap:.4g}, {window.dmax:.4g}]"
        )
    if abs(zeta) < 1.0 and abs(z) < 1e-14:
        raise PoleAtZero("z = 0 is the flat-band pole for |zeta| < 1")

    ts = transfer_system(z, window)
    if abs(ts.lam1) < 1.0:
        lam_d, lam_g = ts.lam1, ts.lam2
        xi_d, xi_g = ts.xi1, ts.xi2
    else:
        lam_d, lam_g = ts.lam2, ts.lam1
        xi_d, xi_g = ts.xi2, ts.xi1

    zc = np.conj(zeta)
    N = ncells
    # Inhomogeneity of the first-order recursion psi_{n+1} = M psi_n + F_n.
    F = np.zeros((N, 2), dtype=complex)
    F[:, 0] = f[:, 1]
    F[:, 1] = (z / zc) * f[:, 1]
    F[:-1, 1] += f[1:, 0] / zc
    # Coordinates of F_n in the eigenbasis {xi_d, xi_g}.
    B = np.column_stack([xi_d, xi_g])
    G = np.linalg.solve(B, F.T)  # shape (2, N): rows G_d, G_g
    Gd, Gg = G[0], G[1]

    # Growing-mode coefficients: backward recursion, zero beyond the support.
    cg = np.zeros(N, dtype=complex)
    acc = 0.0 + 0.0j
    for n in range(N - 1, -1, -1):
        acc = (acc - Gg[n]) / lam_g
        cg[n] = acc

    # Boundary row (-z, conj(zeta)) . psi_0 = f_0^A fixes the free constant.
    r = np.array([-z, zc], dtype=complex)
    coef_d = r @ xi_d
    mu = (f[0, 0] - (r @ xi_g) * cg[0]) / coef_d

    # Decaying-mode coefficients: forward recursion from mu.
    cd = np.empty(N, dtype=complex)
    cd[0] = mu
    for n in range(N - 1):
        cd[n + 1] = lam_d * cd[n] + Gd[n]

    return np.outer(cd, xi_d) + np.outer(cg, xi_g)


def solvability_defect(f: np.ndarray, window: SpectralWindow) -> complex:
    """Inner product <psi_bd, f> against the exact normalized flat-band state."""
    f = np.asarray(f, dtype=complex)
    state = flat_band_state(window, f.shape[0])
    return complex(np.vdot(state.amplitudes, f))


def left_mass_fraction(vec: np.ndarray, ncells: int) -> float:
    """Fraction of l2 mass in the first ceil(N/4) cells of an interleaved vector."""
    m = math.ceil(ncells / 4)
    total = float(np.vdot(vec, vec).real)
    return float(np.vdot(vec[: 2 * m], vec[: 2 * m]).real) / total


def _right_mass_fraction(vec: np.ndarray, ncells: int) -> float:
    m = math.ceil(ncells / 4)
    total = float(np.vdot(vec, vec).real)
    return float(np.vdot(vec[-2 * m :], vec[-2 * m :]).real) / total


def classify_modes(
    op: FiberOperator,
    evals: np.ndarray,
    evecs: np.ndarray,
    zero_tol: float = 1e-8,
) -> Tuple[np.ndarray, np.ndarray, List[EdgeFlag], np.ndarray]:
    """Flag eigenvectors as left-edge, right-edge (truncation artifact) or bulk.

    Near-zero eigenvalues of the finite chain hybridize across the two ends
    once the splitting drops below machine precision, so the raw eigenvectors
    of the degenerate cluster can come out half-and-half.  Within the cluster
    of |E| < zero_tol we rotate to eigenvectors of the left-mass operator,
    which de-hybridizes the pair; reported eigenvalues for rotated vectors are
    their (real) Rayleigh quotients, which differ from the raw values by at
    most the cluster width.
    """
    N = op.ncells
    evals = evals.copy()
    evecs = evecs.copy()
    cluster = np.where(np.abs(evals) < zero_tol)[0]
    if len(cluster) >= 2:
        V = evecs[:, cluster]
        m = math.ceil(N / 4)
        W = V[: 2 * m].conj().T @ V[: 2 * m]
        _, U = scipy.linalg.eigh(W)
        V = V @ U
        evecs[:, cluster] = V
        evals[cluster] = np.real(np.einsum("ij,ij->j", V.conj(), op.matrix @ V))
    flags: List[EdgeFlag] = []
    fracs = np.empty(len(evals))
    for j in range(len(evals)):
        fl = left_mass_fraction(evecs[:, j], N)
        fr = _right_mass_fraction(evecs[:, j], N)
        fracs[j] = fl
        if fl >= 0.9:
            flags.append("left")
        elif fr >= 0.9:
            flags.append("right")
        else:
            flags.append("none")
    return evals, evecs, flags, fracs


@dataclass(frozen=True)
class BandPoint:
    """Classified spectrum of one fiber in a kpar sweep."""

    kpar: float
    eigenvalues: np.ndarray
    flags: List[EdgeFlag]
    left_mass: np.ndarray


def band_sweep(kpars: Sequence[float], ncells: int) -> List[BandPoint]:
    """Spectrum plus edge classification for each kpar in the grid."""
    out: List[BandPoint] = []
    for kp in kpars:
        op = build_fiber(spectral_window(kp), ncells)
        evals, evecs = spectrum(op)
        evals, _, flags, fracs = classify_modes(op, evals, evecs)
        out.append(BandPoint(kpar=float(kp), eigenvalues=evals, flags=flags, left_mass=fracs))
    return out
