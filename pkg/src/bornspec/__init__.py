"""Spectra and norm bounds of the discretized electromagnetic Green operator on voxelized bodies."""

from .assembly import OperatorMatrix, assemble, born_solve, frobenius_norm, matrix_poly, opnorm_estimate
from .bounds import (
    BoundsReport,
    gamma_hs_bound,
    i_functional_direct,
    i_functional_fourier,
    i_functional_hls,
    opnorm_bounds,
    series_upper_bound,
)
from .divfree import DivFreeBasis, build_divfree_basis, compress
from .estimators import BornSolver, DivFreeProjector, VoxelSpectrum
from .geometry import Geometry, SurfaceMesh, icosphere_mesh, min_enclosing_sphere, voxelize
from .spectral import (
    SeriesReport,
    Spectrum,
    Thresholds,
    accumulation_report,
    analyze,
    classify_modes,
    eig_dense,
    spectral_series,
)
from .surface import SurfaceHSReport, assemble_surface_matrix, hs_trace4, surface_kernel

__all__ = [
    "OperatorMatrix",
    "assemble",
    "born_solve",
    "frobenius_norm",
    "matrix_poly",
    "opnorm_estimate",
    "BoundsReport",
    "gamma_hs_bound",
    "i_functional_direct",
    "i_functional_fourier",
    "i_functional_hls",
    "opnorm_bounds",
    "series_upper_bound",
    "DivFreeBasis",
    "build_divfree_basis",
    "compress",
    "BornSolver",
    "DivFreeProjector",
    "VoxelSpectrum",
    "Geometry",
    "SurfaceMesh",
    "icosphere_mesh",
    "min_enclosing_sphere",
    "voxelize",
    "SeriesReport",
    "Spectrum",
    "Thresholds",
    "accumulation_report",
    "analyze",
    "classify_modes",
    "eig_dense",
    "spectral_series",
    "SurfaceHSReport",
    "assemble_surface_matrix",
    "hs_trace4",
    "surface_kernel",
]
