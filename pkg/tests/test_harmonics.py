import math

import numpy as np
import pytest
from scipy.special import sph_harm_y

from bornspec import harmonics


def sphere_quadrature(n=24):
    """Gauss-Legendre in cos(theta) times uniform phi; exact for degree < 2n."""
    x, w = np.polynomial.legendre.leggauss(n)
    phi = np.arange(2 * n) * np.pi / n
    X, P = np.meshgrid(x, phi, indexing="ij")
    W = np.outer(w, np.full(2 * n, np.pi / n))
    s = np.sqrt(1 - X**2)
    pts = np.stack([s * np.cos(P), s * np.sin(P), X], axis=-1).reshape(-1, 3)
    return pts, W.reshape(-1), np.arccos(X).reshape(-1), P.reshape(-1)


@pytest.mark.parametrize("l", range(6))
def test_complex_combination_matches_scipy(l):
    pts, _, theta, phi = sphere_quadrature(8)
    real = {m: harmonics.evaluate(harmonics.solid_harmonic(l, m), pts) for m in range(-l, l + 1)}
    for m in range(-l, l + 1):
        ours = harmonics.complex_from_real(l, m, real)
        np.testing.assert_allclose(ours, sph_harm_y(l, m, theta, phi), atol=1e-13)


def laplacian(p):
    out = {}
    for axis, g in enumerate(harmonics.gradient(p)):
        for key, val in harmonics.gradient(g)[axis].items():
            out[key] = out.get(key, 0.0) + val
    return out


@pytest.mark.parametrize("l", range(7))
def test_solid_harmonics_are_harmonic(l):
    for m in range(-l, l + 1):
        lap = laplacian(harmonics.solid_harmonic(l, m))
        assert max((abs(v) for v in lap.values()), default=0.0) <= 1e-10


def test_orthonormal_on_unit_sphere():
    pts, w, _, _ = sphere_quadrature(16)
    keys = [(l, m) for l in range(7) for m in range(-l, l + 1)]
    Y = np.stack([harmonics.evaluate(harmonics.solid_harmonic(l, m), pts) for l, m in keys])
    gram = (Y * w) @ Y.T
    np.testing.assert_allclose(gram, np.eye(len(keys)), atol=1e-12)


def test_homogeneous_degree():
    for l in range(5):
        for m in range(-l, l + 1):
            assert all(sum(e) == l for e in harmonics.solid_harmonic(l, m))


def test_invalid_indices():
    with pytest.raises(ValueError):
        harmonics.solid_harmonic(2, 3)


def test_gradient_matches_finite_difference(rng):
    p = harmonics.solid_harmonic(4, -3)
    x = rng.normal(size=(5, 3))
    eps = 1e-6
    fd = np.stack([(harmonics.evaluate(p, x + eps * e) - harmonics.evaluate(p, x - eps * e)) / (2 * eps)
                   for e in np.eye(3)], axis=1)
    np.testing.assert_allclose(harmonics.evaluate_gradient(p, x), fd, rtol=1e-7, atol=1e-8)
    assert math.isfinite(fd.sum())
