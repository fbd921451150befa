"""Boundary quadrature of the geometric Hilbert-Schmidt quantity trace(M^4)."""

from dataclasses import asdict, dataclass

import numpy as np

from . import mie
from .errors import GeometryError, SelfTermError, ValidationError
from .geometry import SurfaceMesh

SELF_TERM_POLICY = "local-disc"


def surface_kernel(ra, na, rb, total_area):
    """n_a.(r_a - r_b) / (2 pi |r_a - r_b|^3) - 1 / total_area for one panel pair."""
    d = np.asarray(ra, dtype=float) - np.asarray(rb, dtype=float)
    dist = np.linalg.norm(d)
    if dist == 0:
        raise SelfTermError("coincident panels: use the local-disc self term")
    return float(np.dot(na, d) / (2 * np.pi * dist**3) - 1.0 / total_area)


def _fit_radius(points):
    """Least-squares sphere radius through points; inf when they are coplanar."""
    centroid = points.mean(axis=0)
    X = points - centroid
    if np.linalg.svd(X, compute_uv=False)[-1] <= 1e-10 * np.abs(X).max():
        return np.inf
    # |x|^2 = 2 c.x + t
    A = np.hstack([2 * X, np.ones((len(X), 1))])
    b = np.einsum("ij,ij->i", X, X)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    c, t = sol[:3], sol[3]
    r2 = t + c @ c
    return float(np.sqrt(r2)) if r2 > 0 else np.inf


def local_radii(mesh: SurfaceMesh):
    """Curvature radius per panel from a sphere fit of its vertex one-ring."""
    if mesh.radius is not None:
        return np.full(mesh.panel_count, float(mesh.radius))
    cached = mesh._cache.get("r_loc")
    if cached is not None:
        return cached
    F = mesh.faces
    vert_faces = [[] for _ in range(len(mesh.vertices))]
    for f, tri in enumerate(F):
        for v in tri:
            vert_faces[v].append(f)
    radii = np.empty(len(F))
    for f, tri in enumerate(F):
        ring = np.unique(np.concatenate([F[g] for v in tri for g in vert_faces[v]]))
        radii[f] = _fit_radius(mesh.vertices[ring])
    mesh._cache["r_loc"] = radii
    return radii


@dataclass(frozen=True, eq=False)
class SurfaceKernelMatrix:
    entries: np.ndarray
    weights: np.ndarray
    total_area: float

    @property
    def panel_count(self):
        return self.entries.shape[0]


def assemble_surface_matrix(mesh: SurfaceMesh):
    """M(a, b) = K(a, b) w_b with the local-disc rule on the diagonal."""
    if mesh.panel_count < 20:
        raise ValidationError("surface assembly needs at least 20 panels")
    w = mesh.areas
    if np.any(w <= 0):
        raise GeometryError(f"degenerate panel {int(np.argmin(w))} has zero area")
    A = mesh.total_area
    c, n = mesh.centroids, mesh.normals
    n_pan = mesh.panel_count
    M = np.empty((n_pan, n_pan))
    step = max(1, 2_000_000 // n_pan)
    for s in range(0, n_pan, step):
        e = min(n_pan, s + step)
        d = c[s:e, None, :] - c[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        rows = np.arange(s, e)
        dist[rows - s, rows] = 1.0
        K = np.einsum("ik,ijk->ij", n[s:e], d) / (2 * np.pi * dist**3) - 1.0 / A
        M[s:e] = K * w[None, :]
    r_loc = local_radii(mesh)
    disc = np.where(np.isfinite(r_loc), np.sqrt(w / np.pi) / (2 * r_loc), 0.0)
    M[np.diag_indices(n_pan)] = disc - w / A
    return SurfaceKernelMatrix(M, w.copy(), A)


@dataclass
class SurfaceHSReport:
    trace4_value: float
    panel_count: int
    self_term_policy: str = SELF_TERM_POLICY
    oracle_value: float | None = None
    rel_error: float | None = None

    def to_dict(self):
        return asdict(self)


def hs_trace4(M: SurfaceKernelMatrix, sphere=False):
    """trace(M^4) computed as the double-integral form trace(M^2 M^2)."""
    M2 = M.entries @ M.entries
    val = float(np.einsum("ij,ji->", M2, M2))
    report = SurfaceHSReport(val, M.panel_count)
    if sphere:
        report.oracle_value = mie.c3_closed()
        report.rel_error = abs(val / report.oracle_value - 1.0)
    return report
