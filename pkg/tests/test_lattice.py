"""Geometry invariants of the honeycomb frame and the per-kpar scalars."""

import cmath
import math

import numpy as np
import pytest

from zzedge.lattice import (
    SiteIndex,
    enumerate_sharp_sites,
    make_frame,
    site_position,
    spectral_window,
)


@pytest.fixture(scope="module")
def frame():
    return make_frame()


def test_basis_lengths_and_angle(frame):
    assert np.linalg.norm(frame.v1) == pytest.approx(1.0, abs=1e-15)
    assert np.linalg.norm(frame.v2) == pytest.approx(1.0, abs=1e-15)
    assert float(frame.v1 @ frame.v2) == pytest.approx(0.5, abs=1e-15)


def test_dual_basis_pairing(frame):
    for Ki, expect in ((frame.K1, (1, 0)), (frame.K2, (0, 1))):
        assert float(Ki @ frame.v1) == pytest.approx(2 * math.pi * expect[0], abs=1e-12)
        assert float(Ki @ frame.v2) == pytest.approx(2 * math.pi * expect[1], abs=1e-12)


def test_nearest_neighbor_distance(frame):
    assert np.linalg.norm(frame.e) == pytest.approx(1 / math.sqrt(3), abs=1e-15)


def test_three_neighbors_equidistant(frame):
    """vB must be the centroid of the triangle {vA, vA+v1, vA+v2}."""
    for neighbor in (frame.vA, frame.vA + frame.v1, frame.vA + frame.v2):
        d = np.linalg.norm(frame.vB - neighbor)
        assert d == pytest.approx(1 / math.sqrt(3), abs=1e-14)


def test_vB_is_centroid(frame):
    np.testing.assert_allclose(frame.vB, (frame.v1 + frame.v2) / 3.0, atol=1e-15)


@pytest.mark.parametrize("kpar", [0.0, 0.3, 2 * math.pi / 3, 2.6, math.pi])
def test_spectral_window_values(kpar):
    w = spectral_window(kpar)
    zeta = 1 + cmath.exp(1j * kpar)
    assert w.zeta == pytest.approx(zeta, abs=1e-15)
    assert w.dgap == pytest.approx(abs(1 - abs(zeta)), abs=1e-15)
    assert w.dmax == pytest.approx(1 + abs(zeta), abs=1e-15)


def test_flat_band_interval_boundary():
    # |zeta| < 1 exactly on (2pi/3, 4pi/3)
    assert abs(spectral_window(2 * math.pi / 3 + 0.01).zeta) < 1
    assert abs(spectral_window(4 * math.pi / 3 - 0.01).zeta) < 1
    assert abs(spectral_window(2 * math.pi / 3 - 0.01).zeta) > 1
    assert abs(spectral_window(4 * math.pi / 3 + 0.01).zeta) > 1


def test_site_position(frame):
    s = SiteIndex("B", 2, -1)
    np.testing.assert_allclose(
        site_position(frame, s), frame.vB + 2 * frame.v1 - frame.v2, atol=1e-15
    )


def test_enumerate_sharp_sites_count_and_halfspace(frame):
    sites = enumerate_sharp_sites(frame, 3, range(-2, 3))
    assert len(sites) == 2 * 4 * 5
    assert all(s.n1 >= 0 for s in sites)
    # ordering: cell-major, A before B
    assert sites[0].sublattice == "A" and sites[1].sublattice == "B"
    with pytest.raises(ValueError):
        enumerate_sharp_sites(frame, -1, [0])
