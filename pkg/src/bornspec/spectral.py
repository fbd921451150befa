"""Dense spectra, mode classification and the spectral series."""

from dataclasses import asdict, dataclass, field
import math

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from . import assembly, divfree, mie
from ._validation import check_square
from .errors import EigenSolverError, ValidationError

PHYSICAL = "physical"
LONGITUDINAL = "longitudinal"
NULL = "numerical_null"


@dataclass(frozen=True)
class Thresholds:
    tau0_rel: float = 1e-8
    tau_div: float = 0.1
    tau_im: float = 1e-6
    eps_accum: float = 0.05
    longitudinal_radius: float = 0.05


def _norm2(M):
    if M.shape[0] <= 2000:
        return float(linalg.norm(M, 2)) if M.size else 0.0
    return float(np.linalg.norm(M))


def eig_dense(M, vectors=False, backward_tol=1e-8):
    """All eigenvalues of a dense matrix (Hessenberg reduction + shifted QR, LAPACK geev).

    With ``vectors=True`` the unit right eigenvectors are returned as
    columns and every pair is checked for ||Mv - lambda v|| <= tol ||M||.
    """
    M = check_square(M)
    n = M.shape[0]
    if n == 0:
        return (np.zeros(0, complex), np.zeros((0, 0), complex)) if vectors else np.zeros(0, complex)
    A = np.array(M, dtype=complex, order="F")
    w, _, vr, info = lapack.zgeev(A, compute_vl=0, compute_vr=int(vectors), overwrite_a=1)
    if info > 0:
        raise EigenSolverError(info - 1)
    if info < 0:
        raise ValidationError(f"zgeev rejected argument {-info}")
    if not vectors:
        return w
    vr = vr / np.linalg.norm(vr, axis=0)
    resid = np.linalg.norm(M @ vr - vr * w, axis=0)
    bound = backward_tol * max(_norm2(M), np.finfo(float).tiny)
    bad = np.flatnonzero(resid > bound)
    if bad.size:
        raise EigenSolverError(int(bad[0]), f"eigenpair {bad[0]} has residual {resid[bad[0]]:.3e} > {bound:.3e}")
    return w, vr


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    labels: np.ndarray
    divergence_ratios: np.ndarray
    k: float = 0.0
    geometry_id: str = ""
    degrees: np.ndarray | None = None

    def __post_init__(self):
        if not (len(self.eigenvalues) == len(self.labels) == len(self.divergence_ratios)):
            raise ValidationError("eigenvalues, labels and divergence ratios must have equal length")

    def mask(self, label):
        return self.labels == label

    @property
    def physical(self):
        return self.eigenvalues[self.mask(PHYSICAL)]

    def label_counts(self):
        return {lab: int(np.sum(self.labels == lab)) for lab in (PHYSICAL, LONGITUDINAL, NULL)}


def classify_modes(eigenvalues, vectors, divergence_operator, h, *, basis_matrix=None,
                   thresholds=Thresholds(), operator_norm=None, column_degrees=None,
                   k=0.0, geometry_id=""):
    """Label eigenpairs as physical, longitudinal or numerical null.

    ``vectors`` are right eigenvectors as columns, in basis coordinates when
    ``basis_matrix`` is given and in the voxel frame otherwise.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    V = np.asarray(vectors)
    fields = V if basis_matrix is None else basis_matrix @ V
    num = np.linalg.norm(divergence_operator @ fields, axis=0) * h if divergence_operator.shape[0] else np.zeros(len(lam))
    den = np.linalg.norm(fields, axis=0)
    rho = np.divide(num, den, out=np.zeros_like(num, dtype=float), where=den > 0)
    if operator_norm is None:
        operator_norm = float(np.max(np.abs(lam))) if lam.size else 0.0
    tau0 = thresholds.tau0_rel * operator_norm
    labels = np.full(lam.shape, PHYSICAL, dtype=object)
    longitudinal = (rho > thresholds.tau_div) | (np.abs(lam + 1.0) < thresholds.longitudinal_radius)
    labels[longitudinal] = LONGITUDINAL
    labels[np.abs(lam) < tau0] = NULL
    degrees = None
    if column_degrees is not None and basis_matrix is not None:
        levels = np.unique(column_degrees)
        weight = np.stack([np.sum(np.abs(V[column_degrees == l]) ** 2, axis=0) for l in levels])
        degrees = levels[np.argmax(weight, axis=0)]
    return Spectrum(lam, labels.astype(str), rho, float(k), geometry_id, degrees)


@dataclass
class SeriesReport:
    series_value: float
    contrast_value: float
    frob_G1: float
    frob_G12: float
    frob_G122: float
    schur_margin: float
    eig_sum_P: float
    schur_ratio: float
    physical_count: int

    def to_dict(self):
        return asdict(self)


def schur_weyl(P):
    """(sum |lambda_i(P)|^2, ||P||_F^2)."""
    lam = eig_dense(P)
    return float(math.fsum(np.abs(lam) ** 2)), float(np.sum(np.abs(P) ** 2))


def spectral_series(spec: Spectrum, compressed=None):
    """Spectral series over physical modes plus Frobenius norms of the compressed polynomials."""
    lam = spec.physical
    S = float(math.fsum(np.abs(lam) ** 2 * np.abs(1 + 2 * lam) ** 4))
    contrast = float(math.fsum(np.abs(lam) ** 2 * np.abs(1 + 2 * lam) ** 2))
    if compressed is None:
        f1 = float(math.sqrt(math.fsum(np.abs(spec.eigenvalues) ** 2)))
        f12 = math.sqrt(contrast)
        f122 = math.sqrt(S)
        eig_sum = S
    else:
        C = check_square(compressed)
        P = assembly.matrix_poly(C, assembly.POLY_G122)
        f1 = assembly.frobenius_norm(C)
        f12 = assembly.frobenius_norm(assembly.matrix_poly(C, assembly.POLY_G12))
        eig_sum, frob_sq = schur_weyl(P)
        f122 = math.sqrt(frob_sq)
    frob_sq = f122**2
    ratio = eig_sum / frob_sq if frob_sq > 0 else 0.0
    return SeriesReport(S, contrast, f1, f12, f122, frob_sq - S, eig_sum, ratio, int(lam.size))


def accumulation_report(spec: Spectrum, eps=0.05):
    if not 0 < eps < 0.25:
        raise ValidationError("accumulation radius must lie in (0, 1/4)")
    lam = spec.physical
    near0 = np.abs(lam) < eps
    near_half = np.abs(lam + 0.5) < eps
    other = ~(near0 | near_half)
    return {
        "count_near_0": int(near0.sum()),
        "count_near_minus_half": int(near_half.sum()),
        "outliers": [complex(z) for z in lam[other]],
    }


def im_violations(spec: Spectrum, tau_im=1e-6):
    """Physical eigenvalues with Im lambda above tau_im."""
    lam = spec.physical
    return int(np.sum(lam.imag > tau_im)), float(np.max(lam.imag, initial=-np.inf))


@dataclass
class Cluster:
    l: int
    target: float
    count: int
    centroid: float
    rel_error: float
    max_member_error: float
    ball_count: int


def mie_clusters(spec: Spectrum, l_max, tol=0.05):
    """Group physical static eigenvalues by dominant harmonic degree and compare with -l/(2l+1).

    ``ball_count`` is the number of eigenvalues anywhere in the spectrum
    within ``tol`` (relative) of the target.
    """
    if spec.degrees is None:
        raise ValidationError("spectrum carries no degree labels; use the harmonic basis")
    lam = spec.eigenvalues.real
    out = []
    for l in range(1, l_max + 1):
        target = mie.static_eigenvalue(l)
        members = lam[(spec.degrees == l) & (spec.labels == PHYSICAL)]
        ball = int(np.sum(np.abs(lam - target) <= tol * abs(target)))
        if members.size == 0:
            out.append(Cluster(l, target, 0, float("nan"), float("inf"), float("inf"), ball))
            continue
        centroid = float(members.mean())
        out.append(Cluster(
            l, target, int(members.size), centroid,
            abs(centroid / target - 1.0), float(np.max(np.abs(members / target - 1.0))), ball,
        ))
    return out


@dataclass
class Analysis:
    spectrum: Spectrum
    series: SeriesReport
    basis: divfree.DivFreeBasis
    compressed: np.ndarray
    operator: assembly.OperatorMatrix = field(repr=False)


def analyze(geom, k=0.0, kind="green", method="auto", degree=None, thresholds=Thresholds(),
            operator=None, memory_cap=None):
    """Assemble, compress, diagonalize, classify and sum the series in one call.

    ``method="auto"`` picks the harmonic basis for static operators and the
    polynomial basis otherwise.
    """
    if kind == "acoustic":
        raise ValidationError("spectral analysis on the divergence-free subspace needs a vector operator")
    A = operator if operator is not None else assembly.assemble(geom, k, kind, memory_cap=memory_cap)
    if method == "auto":
        method = "harmonic" if A.k == 0 or A.kernel_tag == "static" else "polynomial"
    basis = divfree.build_divfree_basis(geom, method, degree)
    C = divfree.compress(A, basis)
    lam, V = eig_dense(C, vectors=True)
    spec = classify_modes(
        lam, V, basis.divergence_operator, geom.h, basis_matrix=basis.basis_matrix,
        thresholds=thresholds, operator_norm=_norm2(C), column_degrees=basis.column_degrees,
        k=A.k, geometry_id=geom.geometry_id,
    )
    return Analysis(spec, spectral_series(spec, C), basis, C, A)
