"""Dense collocation matrices, matrix polynomials and the Born solver."""

from dataclasses import dataclass
import math
import os
import struct
import warnings

import numpy as np
from scipy import linalg

from . import kernels
from ._validation import check_field, check_positive, check_square
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    MemoryCapError,
    SingularSystemError,
    ValidationError,
)
from .geometry import Geometry

DEFAULT_MEMORY_CAP = 8 * 1024**3
MEMORY_CAP_ENV = "BSPC_MEMORY_CAP_BYTES"
_ROW_CHUNK_PAIRS = 400_000


def memory_cap_bytes(cap=None):
    if cap is not None:
        return int(cap)
    env = os.environ.get(MEMORY_CAP_ENV)
    if env:
        try:
            return int(float(env))
        except ValueError as exc:
            raise ValidationError(f"{MEMORY_CAP_ENV} must be a byte count, got {env!r}") from exc
    return DEFAULT_MEMORY_CAP


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    block_size: int
    geometry_id: str
    kernel_tag: str
    k: float

    @property
    def dim(self):
        return self.entries.shape[0]

    def with_entries(self, entries, kernel_tag=None):
        return OperatorMatrix(entries, self.block_size, self.geometry_id, kernel_tag or self.kernel_tag, self.k)


def required_bytes(n_voxels, kind):
    """Bytes for the assembled matrix plus one row chunk of scratch."""
    block = 1 if kind == "acoustic" else 3
    itemsize = 8 if kind == "static" else 16
    dim = block * n_voxels
    return dim * dim * itemsize + 12 * _ROW_CHUNK_PAIRS * 16 * 3


def assemble(geom: Geometry, k=0.0, kind="green", *, memory_cap=None):
    """Collocation matrix of the chosen kernel on the voxel centers.

    Off-diagonal blocks are kernel values times h^3; diagonal blocks are the
    self-cell terms. ``static`` yields a real matrix, everything else is
    complex.
    """
    kernels.check_kind(kind)
    k = check_positive(k, "k", allow_zero=kind != "acoustic")
    need = required_bytes(geom.n_voxels, kind)
    cap = memory_cap_bytes(memory_cap)
    if need > cap:
        raise MemoryCapError(need, cap)

    N = geom.n_voxels
    if kind == "acoustic":
        out = np.empty((N, N), dtype=complex)
    else:
        out = np.empty((N, 3, N, 3), dtype=float if kind == "static" else complex)
    for start, stop, blk in _row_blocks(geom, k, kind):
        out[start:stop] = blk if kind == "acoustic" else blk.transpose(0, 2, 1, 3)

    block = 1 if kind == "acoustic" else 3
    entries = out.reshape(block * N, block * N)
    return OperatorMatrix(entries, block, geom.geometry_id, kind, float(k))


def _row_blocks(geom, k, kind):
    """Yield (start, stop, blocks) for consecutive voxel row ranges.

    Vector kinds yield arrays of shape (rows, N, 3, 3), the scalar kind
    (rows, N).
    """
    P = geom.voxel_centers
    N = geom.n_voxels
    h3 = geom.voxel_volume
    if kind == "acoustic":
        self_term = kernels.acoustic_self_term(k, h3)
    else:
        static_self = kernels.static_self_term()
        gamma_self = kernels.gamma_self_coefficient(k, h3) * np.eye(3)
    rows = max(1, _ROW_CHUNK_PAIRS // max(N, 1))
    for start in range(0, N, rows):
        stop = min(N, start + rows)
        dvec = P[start:stop, None, :] - P[None, :, :]
        ii = np.arange(start, stop)
        # placeholder separation on the diagonal, overwritten by the self term
        dvec[ii - start, ii] = 1.0
        if kind == "acoustic":
            dist = np.sqrt(np.einsum("ijk,ijk->ij", dvec, dvec))
            blk = kernels.acoustic_blocks(dist, k) * h3
            blk[ii - start, ii] = self_term
        elif kind == "static":
            blk = kernels.static_dipole_blocks(dvec) * h3
            blk[ii - start, ii] = static_self
        elif kind == "gamma":
            blk = kernels.gamma_blocks(dvec, k) * h3
            blk[ii - start, ii] = gamma_self
        else:
            blk = (kernels.static_dipole_blocks(dvec) + kernels.gamma_blocks(dvec, k)) * h3
            blk[ii - start, ii] = static_self + gamma_self
        yield start, stop, blk


def streamed_frobenius(geom: Geometry, k=0.0, kind="green"):
    """Frobenius norm of the assembled matrix without storing it."""
    kernels.check_kind(kind)
    k = check_positive(k, "k", allow_zero=kind != "acoustic")
    parts = [float(np.sum(np.abs(blk) ** 2)) for _, _, blk in _row_blocks(geom, k, kind)]
    return float(np.sqrt(math.fsum(parts)))


def _entries(A):
    return A.entries if isinstance(A, OperatorMatrix) else check_square(A)


def matrix_poly(A, coefficients):
    """sum_p c_p A^p with A^0 the identity, evaluated by Horner's rule."""
    coeffs = list(coefficients)
    if not coeffs:
        raise ValidationError("matrix_poly needs at least one coefficient")
    M = _entries(A)
    dtype = np.result_type(M.dtype, *[np.asarray(c).dtype for c in coeffs])
    eye = np.eye(M.shape[0], dtype=dtype)
    acc = coeffs[-1] * eye
    for c in reversed(coeffs[:-1]):
        acc = M @ acc
        acc[np.diag_indices_from(acc)] += c
    if isinstance(A, OperatorMatrix):
        return A.with_entries(acc, kernel_tag=f"poly({A.kernel_tag})")
    return acc


# polynomial coefficients in ascending powers
POLY_G12 = (0.0, 1.0, 2.0)  # A (I + 2A)
POLY_G122 = (0.0, 1.0, 4.0, 4.0)  # A (I + 2A)^2


def frobenius_norm(A):
    M = _entries(A)
    return float(np.sqrt(np.sum(np.abs(M) ** 2)))


def opnorm_estimate(A, tol=1e-10, max_iter=5000, seed=0):
    """Largest singular value by power iteration on A^* A.

    Returns a lower bound that converges to the spectral norm. Iteration
    stops once the geometric tail of the remaining updates, estimated from
    the ratio of successive changes, falls below ``tol`` relative.
    """
    tol = check_positive(tol, "tol")
    M = _entries(A)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + (1j * rng.standard_normal(n) if np.iscomplexobj(M) else 0.0)
    x /= np.linalg.norm(x)
    sigma = 0.0
    prev_step = np.inf
    for _ in range(max_iter):
        y = M.conj().T @ (M @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new_sigma = float(np.sqrt(ny))
        x = y / ny
        step = abs(new_sigma - sigma)
        rate = step / prev_step if prev_step > 0 else 0.0
        tail = step * rate / (1.0 - rate) if rate < 1.0 else np.inf
        if step <= tol * new_sigma and tail <= tol * new_sigma:
            return new_sigma
        sigma, prev_step = new_sigma, step
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", last_iterate=sigma)


# --- Born equation -----------------------------------------------------------


def plane_wave(geom, k, direction=(0.0, 0.0, 1.0), polarization=(1.0, 0.0, 0.0), amplitude=1.0):
    """Samples of amplitude * p * exp(-i k d.r) at the voxel centers."""
    d = np.asarray(direction, dtype=float)
    p = np.asarray(polarization, dtype=complex)
    if d.shape != (3,) or p.shape != (3,) or not np.linalg.norm(d):
        raise ValidationError("direction and polarization must be non-zero 3-vectors")
    d = d / np.linalg.norm(d)
    if abs(np.dot(p, d)) > 1e-12 * np.linalg.norm(p):
        raise ValidationError("polarization must be orthogonal to the propagation direction")
    phase = np.exp(-1j * k * (geom.voxel_centers @ d))
    return (amplitude * phase[:, None] * p[None, :]).reshape(-1)


@dataclass
class BornSolution:
    field: np.ndarray
    amplification_ratio: float
    condition_estimate: float
    residual: float


def _one_norm(M):
    return float(np.max(np.sum(np.abs(M), axis=0)))


def system_matrix(G, chi):
    M = (-chi) * _entries(G)
    M[np.diag_indices_from(M)] += 1.0
    return M


def condition_estimate(G, chi):
    """1-norm condition estimate of I - chi G from its LU factors."""
    M = system_matrix(G, chi)
    anorm = _one_norm(M)
    lu, _ = linalg.lu_factor(M, overwrite_a=True, check_finite=False)
    return _lu_condition(lu, anorm)


def _lu_condition(lu, anorm):
    (gecon,) = linalg.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0.0:
        return np.inf
    return 1.0 / rcond


def born_solve(G, chi, incident, *, residual_tol=1e-10):
    """Solve (I - chi G) E = E_inc by LU with partial pivoting.

    ``G`` is an assembled vector operator; ``incident`` holds the incident
    field per voxel as (N, 3) or flat (3N,).
    """
    M0 = _entries(G)
    if isinstance(G, OperatorMatrix) and G.block_size != 3:
        raise DimensionMismatchError("the Born equation needs a vector (3x3 block) operator")
    n_vox = M0.shape[0] // 3
    e_inc = check_field(incident, n_vox, name="incident field")
    chi = complex(chi)
    if chi == 0:
        return BornSolution(e_inc.copy(), 1.0, 1.0, 0.0)

    M = system_matrix(M0, chi)
    anorm = _one_norm(M)
    with warnings.catch_warnings():
        # exact singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(M, overwrite_a=True, check_finite=False)
    cond = _lu_condition(lu, anorm)
    if not np.isfinite(cond) or cond * np.finfo(float).eps >= 1.0:
        raise SingularSystemError(cond)
    E = linalg.lu_solve((lu, piv), e_inc, check_finite=False)
    del lu
    resid = np.linalg.norm(E - chi * (M0 @ E) - e_inc) / np.linalg.norm(e_inc)
    if not resid <= residual_tol:
        raise SingularSystemError(cond, f"residual {resid:.3e} exceeds {residual_tol:.1e} (condition estimate {cond:.3e})")
    ratio = float(np.sum(np.abs(E) ** 2) / np.sum(np.abs(e_inc) ** 2))
    return BornSolution(E, ratio, cond, float(resid))


# --- binary dump -------------------------------------------------------------

_MAGIC = b"BSPC"


def dump_matrix(A, path):
    """Write header {magic, u32 dim, u32 block} then row-major (re, im) float64 pairs."""
    M = _entries(A)
    block = A.block_size if isinstance(A, OperatorMatrix) else 1
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", M.shape[0], block))
        fh.write(np.ascontiguousarray(M, dtype="<c16").tobytes())


def load_matrix(path):
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) != 12 or head[:4] != _MAGIC:
            raise ValidationError(f"{path}: not a BSPC matrix file")
        dim, block = struct.unpack("<II", head[4:])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != dim * dim:
        raise ValidationError(f"{path}: expected {dim * dim} entries, found {data.size}")
    return data.reshape(dim, dim).astype(complex), block
