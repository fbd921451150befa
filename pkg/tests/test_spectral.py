import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from bornspec import assembly, divfree, mie, spectral
from bornspec.errors import ValidationError

from conftest import sphere

complex_entries = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def fake_spectrum(values):
    lam = np.asarray(values, dtype=complex)
    n = lam.size
    return spectral.Spectrum(lam, np.full(n, spectral.PHYSICAL), np.zeros(n))


def bisect_roots(coeffs, brackets, tol=1e-14):
    p = np.poly1d(coeffs)
    roots = []
    for a, b in brackets:
        fa = p(a)
        while b - a > tol:
            m = 0.5 * (a + b)
            if np.sign(p(m)) == np.sign(fa):
                a, fa = m, p(m)
            else:
                b = m
        roots.append(0.5 * (a + b))
    return np.array(roots)


def match_multisets(x, y):
    cost = np.abs(x[:, None] - y[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def test_eig_dense_examples():
    np.testing.assert_allclose(np.sort(spectral.eig_dense(np.diag([1.0, 2.0, 3.0])).real), [1, 2, 3])
    np.testing.assert_array_equal(spectral.eig_dense(np.array([[0.0, 1.0], [0.0, 0.0]])), [0, 0])


def test_eig_dense_companion_against_bisection():
    coeffs = [1.0, -6.0, 11.0, -6.0]
    companion = np.array([[6.0, -11.0, 6.0], [1.0, 0, 0], [0, 1.0, 0]])
    got = np.sort(spectral.eig_dense(companion).real)
    oracle = bisect_roots(coeffs, [(0.5, 1.5), (1.5, 2.5), (2.5, 3.5)])
    np.testing.assert_allclose(got, oracle, rtol=1e-12)


def test_eig_dense_vectors_backward_error(rng):
    M = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    w, V = spectral.eig_dense(M, vectors=True)
    assert np.linalg.norm(M @ V - V * w, axis=0).max() <= 1e-8 * np.linalg.norm(M, 2)


@pytest.mark.parametrize("values, S", [([0.0], 0.0), ([-0.5], 0.0), ([-1 / 3], 1 / 729)])
def test_series_examples(values, S):
    rep = spectral.spectral_series(fake_spectrum(values))
    assert rep.series_value == pytest.approx(S, rel=1e-15, abs=1e-300)


def test_series_of_truncated_mie_spectrum():
    L = 3000
    vals = np.concatenate([np.full(2 * l + 1, mie.static_eigenvalue(l)) for l in range(1, L + 1)])
    S = spectral.spectral_series(fake_spectrum(vals)).series_value
    assert S == pytest.approx(mie.c5_closed(), abs=1 / (16 * L**2))
    assert math.sqrt(S) == pytest.approx(0.0821, abs=1e-4)


def test_accumulation_examples():
    lam = [mie.static_eigenvalue(l) for l in range(1, 40)]
    rep = spectral.accumulation_report(fake_spectrum(lam), 0.05)
    assert rep["count_near_minus_half"] == 35
    assert len(rep["outliers"]) == 4
    rep = spectral.accumulation_report(fake_spectrum([-1 / 3]), 0.05)
    assert rep["outliers"] == [-1 / 3]
    with pytest.raises(ValidationError):
        spectral.accumulation_report(fake_spectrum([0.0]), 0.3)


def test_accumulation_counts_grow_with_resolution():
    reps = []
    for h in (1 / 5, 1 / 7, 1 / 9):
        an = spectral.analyze(sphere(h), 0.0, "static")
        reps.append(spectral.accumulation_report(an.spectrum, 0.05))
    near = [r["count_near_0"] + r["count_near_minus_half"] for r in reps]
    assert near[0] <= near[1] <= near[2]
    assert near[2] > near[0]


def test_classified_compressed_modes_have_no_divergence():
    g = sphere(1 / 3)
    A = assembly.assemble(g, 0.0, "static")
    b = divfree.build_divfree_basis(g, "central")
    lam, V = spectral.eig_dense(divfree.compress(A, b), vectors=True)
    spec = spectral.classify_modes(lam, V, b.divergence_operator, g.h, basis_matrix=b.basis_matrix)
    assert spec.divergence_ratios.max() <= 1e-9
    counts = spec.label_counts()
    assert counts[spectral.LONGITUDINAL] == np.sum(np.abs(lam + 1) < 0.05)
    assert sum(counts.values()) == lam.size


def test_uncompressed_modes_near_minus_one_are_longitudinal():
    g = sphere(1 / 4)
    A = assembly.assemble(g, 0.0, "static")
    D, _ = divfree.divergence_operator(g)
    lam, V = spectral.eig_dense(A.entries, vectors=True)
    spec = spectral.classify_modes(lam, V, D, g.h)
    near = np.abs(lam + 1) < 0.05
    assert np.all(spec.labels[near] == spectral.LONGITUDINAL)
    assert np.median(spec.divergence_ratios[near]) > 0.5


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(complex, (n, n), elements=complex_entries)))
def test_schur_weyl_holds_for_any_matrix(M):
    P = assembly.matrix_poly(M, assembly.POLY_G122)
    eig_sq, frob_sq = spectral.schur_weyl(P)
    assert eig_sq <= frob_sq * (1 + 1e-9) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: arrays(complex, (n, n), elements=complex_entries)))
def test_polynomial_spectral_mapping(M):
    lam = spectral.eig_dense(M)
    mapped = lam * (1 + 2 * lam) ** 2
    got = spectral.eig_dense(assembly.matrix_poly(M, assembly.POLY_G122))
    scale = max(1.0, np.abs(mapped).max())
    # mapping is well-conditioned only away from defective clusters
    gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(lam.size)
    if gaps.min() < 1e-2:
        return
    assert match_multisets(got, mapped) <= 1e-6 * scale


def test_spectral_mapping_on_compressed_static():
    an = spectral.analyze(sphere(1 / 6), 0.0, "static")
    lam = an.spectrum.eigenvalues
    got = spectral.eig_dense(assembly.matrix_poly(an.compressed, assembly.POLY_G122))
    assert match_multisets(got, lam * (1 + 2 * lam) ** 2) <= 1e-6


@pytest.mark.parametrize("h", [1 / 4, 1 / 6, 1 / 8])
def test_static_compressed_spectrum_real_and_bounded(h):
    an = spectral.analyze(sphere(h), 0.0, "static")
    lam = an.spectrum.eigenvalues
    assert np.abs(lam.imag).max() <= 1e-8
    assert lam.real.min() >= -1.05 and lam.real.max() <= 0.05
    assert an.series.schur_margin >= -1e-9 * an.series.frob_G122**2


def test_series_report_fields_consistent():
    an = spectral.analyze(sphere(1 / 6), 0.0, "static")
    rep = an.series
    assert rep.series_value >= 0
    assert rep.schur_ratio <= 1 + 1e-9
    assert rep.physical_count == an.spectrum.label_counts()[spectral.PHYSICAL]


def test_dynamic_physical_spectrum_has_nonpositive_imaginary_parts():
    an = spectral.analyze(sphere(1 / 5), 0.5, "green")
    count, top = spectral.im_violations(an.spectrum, 1e-6)
    assert count == 0 and top < 0


def test_mie_clusters_need_degree_labels():
    with pytest.raises(ValidationError):
        spectral.mie_clusters(fake_spectrum([-1 / 3]), 1)
