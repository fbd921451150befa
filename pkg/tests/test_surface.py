import dataclasses
import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from bornspec import geometry, harmonics, mie, surface
from bornspec.errors import GeometryError, SelfTermError, ValidationError


def test_sphere_kernel_form():
    R = 1.7
    A = 4 * math.pi * R**2
    ra = R * np.array([0.0, 0.0, 1.0])
    rb = R * np.array([math.sin(1.1), 0.0, math.cos(1.1)])
    d = np.linalg.norm(ra - rb)
    got = surface.surface_kernel(ra, ra / R, rb, A)
    assert got == pytest.approx(1 / (4 * math.pi * R * d) - 1 / (4 * math.pi * R**2), rel=1e-13)


def test_sphere_kernel_vanishes_at_chord_r():
    R = 2.0
    ra = np.array([0.0, 0.0, R])
    rb = R * np.array([math.sin(math.pi / 3), 0.0, math.cos(math.pi / 3)])
    assert abs(surface.surface_kernel(ra, ra / R, rb, 4 * math.pi * R**2)) <= 1e-16


def test_planar_pair_gives_area_term():
    got = surface.surface_kernel([0, 0, 0], [0, 0, 1], [0.3, 0.4, 0], 12.5)
    assert got == -1 / 12.5
    with pytest.raises(SelfTermError):
        surface.surface_kernel([0, 0, 0], [0, 0, 1], [0, 0, 0], 1.0)


def test_row_sums_vanish_under_refinement():
    worst = []
    for n in range(1, 5):
        M = surface.assemble_surface_matrix(geometry.icosphere_mesh(1.0, n))
        worst.append(np.abs(M.entries.sum(axis=1)).max())
    assert all(b < a for a, b in zip(worst, worst[1:]))
    assert worst[-1] < 0.02


@pytest.mark.parametrize("l", [1, 2])
def test_harmonic_eigenrelation(l):
    mesh = geometry.icosphere_mesh(1.0, 3)
    M = surface.assemble_surface_matrix(mesh).entries
    for m in range(-l, l + 1):
        y = harmonics.evaluate(harmonics.solid_harmonic(l, m), mesh.centroids)
        assert np.linalg.norm(M @ y - y / (2 * l + 1)) <= 0.05 * np.linalg.norm(y) / (2 * l + 1)


def test_kernel_symmetric_on_sphere_mesh():
    # centroids sit on the sphere, so the kernel depends on the chord only
    for n in (1, 2, 3):
        M = surface.assemble_surface_matrix(geometry.icosphere_mesh(1.0, n))
        K = M.entries / M.weights[None, :]
        assert np.abs(K - K.T).max() <= 1e-12 * np.abs(K).max()


def test_trace4_equals_eigenvalue_sum():
    M = surface.assemble_surface_matrix(geometry.icosphere_mesh(1.0, 1))
    mu = np.linalg.eigvals(M.entries)
    assert surface.hs_trace4(M).trace4_value == pytest.approx(float(np.sum(mu**4).real), rel=1e-10)


def test_trace4_rotation_and_scale_invariant():
    mesh = geometry.icosphere_mesh(1.0, 2)
    base = surface.hs_trace4(surface.assemble_surface_matrix(mesh)).trace4_value
    Rm = Rotation.from_euler("zyx", [0.3, -1.1, 2.0]).as_matrix()
    rot = surface.hs_trace4(surface.assemble_surface_matrix(mesh.transformed(Rm))).trace4_value
    big = surface.hs_trace4(surface.assemble_surface_matrix(mesh.transformed(scale=2.0))).trace4_value
    assert rot == pytest.approx(base, rel=1e-12)
    assert big == pytest.approx(base, rel=1e-12)


def test_icosahedron_value_is_crude_but_sane():
    rep = surface.hs_trace4(surface.assemble_surface_matrix(geometry.icosphere_mesh(1.0, 0)), sphere=True)
    assert rep.panel_count == 20
    assert rep.oracle_value / 2 <= rep.trace4_value <= 2 * rep.oracle_value
    assert rep.self_term_policy == "local-disc"


def test_fitted_radii_recover_sphere():
    mesh = dataclasses.replace(geometry.icosphere_mesh(1.3, 2), radius=None, _cache={})
    r = surface.local_radii(mesh)
    np.testing.assert_allclose(r, 1.3, rtol=0.02)


def test_coplanar_patch_has_infinite_radius():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0.5, 0.3, 0]], float)
    assert surface._fit_radius(pts) == math.inf


def test_too_few_panels_rejected():
    mesh = geometry.icosphere_mesh(1.0, 0)
    small = dataclasses.replace(mesh, centroids=mesh.centroids[:10], normals=mesh.normals[:10],
                                areas=mesh.areas[:10], faces=mesh.faces[:10], _cache={})
    with pytest.raises(ValidationError):
        surface.assemble_surface_matrix(small)


def test_zero_area_panel_rejected():
    mesh = geometry.icosphere_mesh(1.0, 1)
    areas = mesh.areas.copy()
    areas[7] = 0.0
    with pytest.raises(GeometryError, match="7"):
        surface.assemble_surface_matrix(dataclasses.replace(mesh, areas=areas, _cache={}))


def test_ellipsoid_trace4_finite_and_nonnegative():
    rep = surface.hs_trace4(surface.assemble_surface_matrix(geometry.ellipsoid_mesh((1.0, 0.8, 0.6), 2)))
    assert math.isfinite(rep.trace4_value)
    assert rep.trace4_value >= -1e-6
    assert rep.oracle_value is None
    assert mie.c3_closed() > 0
