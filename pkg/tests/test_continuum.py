"""Cylinder fiber operator, orbital basis, and edge eigensolves."""

import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from zzedge import atomic, continuum
from zzedge import tightbinding as tb
from zzedge.errors import GridTooLarge
from zzedge.lattice import spectral_window

KPAR = 5 * math.pi / 6


@pytest.fixture(scope="module")
def well():
    return atomic.AtomicWell()


@pytest.fixture(scope="module")
def gs8(well):
    return atomic.ground_state(well, 8.0)


@pytest.fixture(scope="module")
def problem(well, gs8):
    grid = continuum.build_grid(6, (18, 18), 2)
    return continuum.assemble_fiber(grid, well, gs8, 8.0, KPAR)


# ---------------------------------------------------------------- grid


def test_build_grid_counts():
    grid = continuum.build_grid(4, (16, 16), 1)
    assert grid.npoints == 5 * 16 * 16
    assert grid.n1 == 80 and grid.n2 == 16
    assert grid.s1[0] == pytest.approx(-1.0)
    assert grid.s1[-1] == pytest.approx(4.0 - 1.0 / 16)
    assert grid.s2[0] == 0.0 and grid.s2[-1] == pytest.approx(1.0 - 1.0 / 16)


def test_build_grid_validation():
    with pytest.raises(ValueError):
        continuum.build_grid(4, (16, 24), 1)
    with pytest.raises(ValueError):
        continuum.build_grid(4, (4, 4), 1)
    with pytest.raises(GridTooLarge):
        continuum.build_grid(400, (40, 40), 1)


def test_grid_coordinates_oblique():
    grid = continuum.build_grid(2, (8, 8), 1)
    pts = grid.coordinates()
    # node k = i*n2 + j sits at (s1_i * v1 + s2_j * v2)
    v1 = np.array([math.sqrt(3) / 2, 0.5])
    v2 = np.array([0.0, 1.0])
    i, j = 5, 3
    np.testing.assert_allclose(
        pts[i * grid.n2 + j], grid.s1[i] * v1 + grid.s2[j] * v2, atol=1e-14
    )


def test_cell_index_covers_pad():
    grid = continuum.build_grid(3, (9, 9), 2)
    ci = grid.cell_index()
    assert ci.min() == -2 and ci.max() == 2
    assert len(ci) == grid.npoints


def test_sharp_well_centers():
    centers = continuum.sharp_well_centers(3)
    assert len(centers) == 6
    v1 = np.array([math.sqrt(3) / 2, 0.5])
    np.testing.assert_allclose(centers[2], v1, atol=1e-15)


# ---------------------------------------------------------------- operator


def test_operator_hermitian(problem):
    H = problem.operator
    assert abs(H - H.getH()).max() < 1e-13


def test_free_operator_positive(well, gs8):
    """Vacuum operator is -Laplacian - E0, bounded below by |E0| > 0."""
    grid = continuum.build_grid(3, (12, 12), 1)
    free = continuum.assemble_fiber(grid, well, gs8, 8.0, KPAR, centers=[])
    evals = spla.eigsh(free.operator, k=1, which="SA",
                       return_eigenvectors=False)
    assert evals[0] >= abs(gs8.E0) - 1e-9


def test_kpar_two_pi_periodicity(well, gs8, problem):
    shifted = continuum.assemble_fiber(problem.grid, well, gs8, 8.0,
                                       KPAR + 2 * math.pi)
    assert abs(problem.operator - shifted.operator).max() < 1e-9


def test_single_well_level_matches_atomic(well, gs8):
    """Discrete companion level of the shifted operator stays well below |E0|.

    e0_grid collects the discretization error of the well eigenvalue plus the
    periodization shift; it is nonzero at desk resolution (which is exactly
    why it is used as the calibrated reference) but must remain a fraction of
    the atomic scale.
    """
    grid = continuum.build_grid(6, (24, 24), 2)
    prob = continuum.assemble_fiber(grid, well, gs8, 8.0, KPAR)
    basis = continuum.orbital_basis(prob)
    assert abs(basis.e0_grid) < 0.3 * abs(gs8.E0)


def test_mesh_refinement_second_order():
    """Edge eigenvalue error shrinks consistent with second order per doubling.

    Uses the smooth bump well: the disc well's discontinuous indicator makes
    pointwise potential sampling jitter with the node count inside the disc,
    which masks the order of the stencil.
    """
    bump = atomic.AtomicWell(shape="bump")
    gs = atomic.ground_state(bump, 12.0)
    vals = {}
    for p in (18, 36, 72):
        grid = continuum.build_grid(6, (p, p), 2)
        prob = continuum.assemble_fiber(grid, bump, gs, 12.0, KPAR)
        basis = continuum.orbital_basis(prob)
        sol = continuum.edge_eigensolve(prob, gs, basis.rho_grid, 12,
                                        e0_offset=basis.e0_grid)
        flagged = [se for se, _, fl in sol if fl]
        assert len(flagged) == 1
        vals[p] = flagged[0].omega_tilde * basis.rho_grid + basis.e0_grid
    e18 = abs(vals[18] - vals[72])
    e36 = abs(vals[36] - vals[72])
    assert e36 / e18 <= 0.35


# ---------------------------------------------------------------- orbitals


def test_orbital_basis_shapes_and_gram(problem):
    basis = continuum.orbital_basis(problem)
    N = problem.grid.ncells
    assert basis.vectors.shape == (2 * N, problem.grid.npoints)
    np.testing.assert_allclose(np.diag(basis.gram).real, 1.0, atol=1e-12)
    off = np.abs(basis.gram - np.eye(2 * N)).max()
    assert 0 < off < 0.5
    assert basis.rho_grid > 0


def test_orbital_basis_needs_divisible_resolution(well, gs8):
    grid = continuum.build_grid(4, (16, 16), 1)
    prob = continuum.assemble_fiber(grid, well, gs8, 8.0, KPAR)
    with pytest.raises(ValueError):
        continuum.orbital_basis(prob)


def test_discrete_bonds_isotropic(well):
    """The three nearest-neighbor bond directions are symmetry-equivalent.

    With the triangular stencil the A_n - B_n element must equal
    |1 + e^{i kpar}| times the B_n - A_{n+1} element (two bonds vs one).
    Checked deep in the strong-binding regime where three-center corrections
    are negligible; at small lambda a genuine O(rho'/rho) deviation remains.
    """
    gs = atomic.ground_state(well, 16.0)
    grid = continuum.build_grid(6, (18, 18), 2)
    prob = continuum.assemble_fiber(grid, well, gs, 16.0, KPAR)
    basis = continuum.orbital_basis(prob)
    H = prob.operator
    e0 = basis.e0_grid
    n = prob.grid.ncells // 2

    def bond(a, b):
        return abs(basis.vectors[a].conj() @ (H @ basis.vectors[b])
                   - e0 * basis.gram[a, b])

    inter = bond(2 * n + 1, 2 * (n + 1))  # B_n -> A_{n+1}
    intra = bond(2 * n, 2 * n + 1)  # A_n -> B_n
    factor = abs(1 + np.exp(1j * KPAR))
    assert intra == pytest.approx(factor * inter, rel=0.01)


def test_orbital_residuals_scale(problem, gs8):
    basis = continuum.orbital_basis(problem)
    res = continuum.orbital_residuals(basis)
    assert res.shape == (2 * problem.grid.ncells,)
    # interior orbitals couple only to their neighbors: a fraction of |E0|;
    # the rightmost orbitals are clipped by the Dirichlet wall and sit higher
    assert res[:-2].max() < 0.6 * abs(gs8.E0)
    assert res.max() < 1.5 * abs(gs8.E0)


def test_ansatz_rayleigh_quotient_small(problem, gs8):
    """The flat-band orbital ansatz nearly annihilates the shifted operator."""
    basis = continuum.orbital_basis(problem)
    N = problem.grid.ncells
    zeta = 1 + np.exp(1j * KPAR)
    a = np.zeros(problem.grid.npoints, dtype=complex)
    for n in range(N):
        a += (-zeta) ** n * basis.vectors[2 * n]
    a /= np.linalg.norm(a)
    rq = abs(np.vdot(a, problem.operator @ a) - basis.e0_grid)
    assert rq < 10 * basis.rho_grid


# ---------------------------------------------------------------- edge solve


def test_edge_eigensolve_flags_and_scaling(problem, gs8):
    basis = continuum.orbital_basis(problem)
    sol = continuum.edge_eigensolve(problem, gs8, basis.rho_grid, 12,
                                    e0_offset=basis.e0_grid)
    assert len(sol) == 12
    flagged = [(se, v) for se, v, fl in sol if fl]
    assert len(flagged) == 1
    se, v = flagged[0]
    assert abs(se.omega_tilde) < 0.5  # inside the gap on the rho scale
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-8)
    # scaled energies are consistent: E = E0_ref + omega * rho
    for se, _, _ in sol:
        assert se.E == pytest.approx(se.E0 + se.omega_tilde * se.rho, abs=1e-9)


def test_no_edge_state_outside_flat_band(well, gs8):
    grid = continuum.build_grid(6, (18, 18), 2)
    prob = continuum.assemble_fiber(grid, well, gs8, 8.0, 0.3)
    basis = continuum.orbital_basis(prob)
    sol = continuum.edge_eigensolve(prob, gs8, basis.rho_grid, 12,
                                    e0_offset=basis.e0_grid)
    dgap = spectral_window(0.3).dgap
    assert not any(fl and abs(se.omega_tilde) < dgap / 2 for se, _, fl in sol)


def test_edge_eigensolve_validates_nev(problem, gs8):
    with pytest.raises(ValueError):
        continuum.edge_eigensolve(problem, gs8, 1.0, 0)


def test_kpar_variation_of_edge_level(well, gs8):
    """The in-gap scaled level moves slowly across nearby kpar values."""
    oms = []
    for kp in (0.8 * math.pi, 0.9 * math.pi, math.pi):
        grid = continuum.build_grid(6, (18, 18), 2)
        prob = continuum.assemble_fiber(grid, well, gs8, 8.0, kp)
        basis = continuum.orbital_basis(prob)
        sol = continuum.edge_eigensolve(prob, gs8, basis.rho_grid, 12,
                                        e0_offset=basis.e0_grid)
        flagged = [se for se, _, fl in sol if fl]
        assert flagged
        oms.append(min(abs(se.omega_tilde) for se in flagged))
    assert max(oms) - min(oms) < 0.5


def test_scaled_spectrum_compare(problem, gs8):
    basis = continuum.orbital_basis(problem)
    N = problem.grid.ncells
    sol = continuum.edge_eigensolve(problem, gs8, basis.rho_grid, 2 * N,
                                    e0_offset=basis.e0_grid)
    tb_evals, _ = tb.spectrum(tb.build_fiber(spectral_window(KPAR), N))
    cmp = continuum.scaled_spectrum_compare([se for se, _, _ in sol], tb_evals)
    assert cmp["hausdorff"] == max(cmp["continuum_to_tb"], cmp["tb_to_continuum"])
    assert cmp["hausdorff"] < 1.0  # same scale; trend checks live in acceptance
    assert len(cmp["omega_tilde"]) == 2 * N
