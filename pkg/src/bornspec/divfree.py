"""Discrete divergence-free subspaces and operator compression.

Three constructions are available:

``central``
    Null space of the interior central-difference divergence. Exact lattice
    kernel, but it also admits checkerboard fields that are not smooth.
``harmonic``
    Gradients of real solid harmonics of degree 1..L, orthonormalized degree
    by degree. These fields are divergence free and curl free; every
    non-zero static eigenmode of a body lies in their closure.
``polynomial``
    All divergence-free vector fields with Legendre polynomial components
    of total degree <= p. Includes solenoidal (curl) fields, so it is the
    better choice for k > 0.
"""

from dataclasses import dataclass
from itertools import product
import math

import numpy as np
from numpy.polynomial import legendre
from scipy import sparse

from . import harmonics
from ._validation import check_square
from .assembly import OperatorMatrix
from .errors import DimensionMismatchError, ValidationError
from .geometry import Geometry

METHODS = ("harmonic", "polynomial", "central")
_RANK_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class DivFreeBasis:
    basis_matrix: np.ndarray
    divergence_operator: sparse.csr_matrix
    interior_voxel_count: int
    method: str
    h: float
    degree: int | None = None
    column_degrees: np.ndarray | None = None

    @property
    def dim(self):
        return self.basis_matrix.shape[1]

    def divergence_ratio(self, fields):
        """||D f|| h / ||f|| for full-frame fields stored as columns."""
        F = np.asarray(fields)
        if F.ndim == 1:
            F = F[:, None]
        num = np.linalg.norm(self.divergence_operator @ F, axis=0) * self.h
        den = np.linalg.norm(F, axis=0)
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def divergence_operator(geom: Geometry):
    """Central-difference divergence, one row per voxel with all six neighbours."""
    idx = geom.lattice_indices()
    N = geom.n_voxels
    lookup = {tuple(v): i for i, v in enumerate(idx)}
    rows, cols, vals = [], [], []
    n_int = 0
    inv = 1.0 / (2.0 * geom.h)
    for i, v in enumerate(idx):
        nbrs = []
        for axis in range(3):
            plus, minus = v.copy(), v.copy()
            plus[axis] += 1
            minus[axis] -= 1
            jp, jm = lookup.get(tuple(plus)), lookup.get(tuple(minus))
            if jp is None or jm is None:
                break
            nbrs.append((axis, jp, jm))
        else:
            for axis, jp, jm in nbrs:
                rows += [n_int, n_int]
                cols += [3 * jp + axis, 3 * jm + axis]
                vals += [inv, -inv]
            n_int += 1
    D = sparse.csr_matrix((vals, (rows, cols)), shape=(n_int, 3 * N))
    return D, n_int


def default_degree(geom: Geometry):
    """Largest harmonic degree resolved by the lattice: floor(r_v / 2h), at least 1."""
    return max(1, int(math.floor(geom.r_v / (2.0 * geom.h) + 1e-9)))


def _orthonormal_columns(F, cutoff=_RANK_CUTOFF):
    U, s, _ = np.linalg.svd(F, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, s > cutoff * s[0]]


def _harmonic_fields(geom, degree):
    scale = geom.r_v if geom.r_v > 0 else geom.h
    x = (geom.voxel_centers - geom.center) / scale
    N = geom.n_voxels
    Q = np.zeros((3 * N, 0))
    col_deg = []
    for l in range(1, degree + 1):
        F = np.stack(
            [harmonics.evaluate_gradient(harmonics.solid_harmonic(l, m), x).reshape(-1) for m in range(-l, l + 1)],
            axis=1,
        )
        for _ in range(2):
            F = F - Q @ (Q.T @ F)
        if np.linalg.norm(F) == 0:
            continue
        q = _orthonormal_columns(F, 1e-8)
        Q = np.hstack([Q, q])
        col_deg += [l] * q.shape[1]
    return Q, np.array(col_deg, dtype=int)


def _polynomial_fields(geom, degree):
    """Legendre-coefficient null space of the exact divergence, sampled at voxel centers."""
    p = degree
    idx = [m for m in product(range(p + 1), repeat=3) if sum(m) <= p]
    pos = {m: i for i, m in enumerate(idx)}
    nb = len(idx)
    idx_d = [m for m in product(range(max(p, 1)), repeat=3) if sum(m) <= p - 1]
    pos_d = {m: i for i, m in enumerate(idx_d)}
    Dm = np.zeros((len(idx_d), 3 * nb))
    for axis in range(3):
        for m in idx:
            if m[axis] == 0:
                continue
            c = np.zeros(m[axis] + 1)
            c[-1] = 1.0
            for j, v in enumerate(legendre.legder(c)):
                if v == 0:
                    continue
                mm = list(m)
                mm[axis] = j
                Dm[pos_d[tuple(mm)], axis * nb + pos[m]] += v
    if Dm.shape[0]:
        _, s, vt = np.linalg.svd(Dm)
        rank = int(np.sum(s > _RANK_CUTOFF * s[0]))
        coef = vt[rank:].T
    else:
        coef = np.eye(3 * nb)
    scale = geom.r_v if geom.r_v > 0 else geom.h
    x = (geom.voxel_centers - geom.center) / scale
    V = np.ones((geom.n_voxels, nb))
    vand = [legendre.legvander(x[:, a], p) for a in range(3)]
    for i, m in enumerate(idx):
        V[:, i] = vand[0][:, m[0]] * vand[1][:, m[1]] * vand[2][:, m[2]]
    F = np.zeros((3 * geom.n_voxels, coef.shape[1]))
    for a in range(3):
        F[a::3] = V @ coef[a * nb : (a + 1) * nb]
    return _orthonormal_columns(F)


def _central_null_space(D, N):
    if D.shape[0] == 0:
        return np.eye(3 * N)
    Dd = D.toarray()
    _, s, vt = np.linalg.svd(Dd, full_matrices=True)
    rank = int(np.sum(s > _RANK_CUTOFF * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T.copy()


def build_divfree_basis(geom: Geometry, method="harmonic", degree=None):
    """Orthonormal basis of a discrete divergence-free subspace on ``geom``.

    ``degree`` is the top harmonic degree L for ``harmonic`` and the top
    component degree for ``polynomial``; both default to the lattice
    resolution limit (``polynomial`` uses L - 1 so the two bases carry
    fields of the same polynomial degree).
    """
    if method not in METHODS:
        raise ValidationError(f"unknown basis method {method!r}; expected one of {METHODS}")
    D, n_int = divergence_operator(geom)
    N = geom.n_voxels
    col_deg = None
    if N == 1:
        B = np.eye(3)
        degree = None
    elif method == "central":
        B = _central_null_space(D, N)
        degree = None
    elif method == "harmonic":
        degree = default_degree(geom) if degree is None else int(degree)
        if degree < 1:
            raise ValidationError("harmonic degree must be >= 1")
        B, col_deg = _harmonic_fields(geom, degree)
    else:
        degree = max(1, default_degree(geom) - 1) if degree is None else int(degree)
        if degree < 0:
            raise ValidationError("polynomial degree must be >= 0")
        B = _polynomial_fields(geom, degree)
    return DivFreeBasis(np.ascontiguousarray(B), D, n_int, method, geom.h, degree, col_deg)


def compress(A, basis: DivFreeBasis):
    """B^* A B."""
    M = A.entries if isinstance(A, OperatorMatrix) else check_square(A)
    if isinstance(A, OperatorMatrix) and A.block_size != 3:
        raise DimensionMismatchError("only vector operators can be compressed onto a field basis")
    B = basis.basis_matrix
    if M.shape[0] != B.shape[0]:
        raise DimensionMismatchError(f"operator dimension {M.shape[0]} does not match basis rows {B.shape[0]}")
    return B.conj().T @ (M @ B)
