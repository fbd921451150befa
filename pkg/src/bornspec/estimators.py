"""scikit-learn style wrappers around the functional API.

The sample matrix ``X`` is always the (N, 3) array of voxel centers; the
lattice pitch is taken from ``spacing`` or inferred as the nearest-neighbour
distance.
"""

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import assembly, divfree, geometry, spectral
from ._validation import check_field, check_points
from .errors import DimensionMismatchError, ValidationError


def _geometry_from_X(X, spacing):
    pts = check_points(X)
    if spacing is None:
        if pts.shape[0] < 2:
            raise ValidationError("spacing cannot be inferred from a single voxel")
        dist, _ = cKDTree(pts).query(pts, k=2)
        spacing = float(np.min(dist[:, 1]))
    return geometry.from_points(pts, spacing)


class VoxelSpectrum(BaseEstimator):
    """Spectrum of an operator compressed onto a divergence-free subspace."""

    def __init__(self, k=0.0, kind="green", basis="auto", degree=None, spacing=None,
                 tau0_rel=1e-8, tau_div=0.1, tau_im=1e-6):
        self.k = k
        self.kind = kind
        self.basis = basis
        self.degree = degree
        self.spacing = spacing
        self.tau0_rel = tau0_rel
        self.tau_div = tau_div
        self.tau_im = tau_im

    def fit(self, X, y=None):
        self.geometry_ = _geometry_from_X(X, self.spacing)
        thr = spectral.Thresholds(tau0_rel=self.tau0_rel, tau_div=self.tau_div, tau_im=self.tau_im)
        an = spectral.analyze(self.geometry_, self.k, self.kind, self.basis, self.degree, thr)
        self.spectrum_ = an.spectrum
        self.series_ = an.series
        self.eigenvalues_ = an.spectrum.eigenvalues
        self.labels_ = an.spectrum.labels
        self.n_features_in_ = 3
        return self


class BornSolver(BaseEstimator):
    """Dense solver for (I - chi G) E = E_inc on a fixed voxel set."""

    def __init__(self, chi=1.0, k=0.0, kind="green", spacing=None):
        self.chi = chi
        self.k = k
        self.kind = kind
        self.spacing = spacing

    def fit(self, X, y=None):
        self.geometry_ = _geometry_from_X(X, self.spacing)
        if self.kind not in ("static", "green"):
            raise ValidationError("BornSolver kind must be 'static' or 'green'")
        self.operator_ = assembly.assemble(self.geometry_, self.k, self.kind)
        self.n_features_in_ = 3
        return self

    def predict(self, incident):
        """Total field (N, 3) for an incident field given per voxel."""
        check_is_fitted(self, "operator_")
        sol = assembly.born_solve(self.operator_, self.chi, incident)
        self.amplification_ratio_ = sol.amplification_ratio
        self.condition_estimate_ = sol.condition_estimate
        return sol.field.reshape(-1, 3)

    def predict_plane_wave(self, direction=(0, 0, 1), polarization=(1, 0, 0), amplitude=1.0):
        check_is_fitted(self, "operator_")
        inc = assembly.plane_wave(self.geometry_, self.k, direction, polarization, amplitude)
        return self.predict(inc)


class DivFreeProjector(TransformerMixin, BaseEstimator):
    """Maps voxel fields to coordinates in a divergence-free basis and back.

    ``transform`` takes fields as rows of shape (n_samples, 3N).
    """

    def __init__(self, method="harmonic", degree=None, spacing=None):
        self.method = method
        self.degree = degree
        self.spacing = spacing

    def fit(self, X, y=None):
        self.geometry_ = _geometry_from_X(X, self.spacing)
        self.basis_ = divfree.build_divfree_basis(self.geometry_, self.method, self.degree)
        self.n_components_ = self.basis_.dim
        self.n_features_in_ = 3
        return self

    def _rows(self, F, width):
        F = np.asarray(F)
        if F.ndim == 1:
            F = F[None, :]
        if F.ndim != 2 or F.shape[1] != width:
            raise DimensionMismatchError(f"expected rows of length {width}, got shape {np.shape(F)}")
        return F

    def transform(self, F):
        check_is_fitted(self, "basis_")
        B = self.basis_.basis_matrix
        F = self._rows(F, B.shape[0])
        for row in F:
            check_field(row, B.shape[0] // 3)
        return F @ B.conj()

    def inverse_transform(self, C):
        check_is_fitted(self, "basis_")
        B = self.basis_.basis_matrix
        return self._rows(C, B.shape[1]) @ B.T
