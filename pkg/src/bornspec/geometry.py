"""Voxelized volumes, exact minimum enclosing balls and icosphere meshes."""

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
import hashlib

import numpy as np
from scipy.spatial import cKDTree

from ._validation import check_points, check_positive
from .errors import EmptyVoxelizationError, GeometryError, VoxelFileError, ValidationError

SHAPES = ("sphere", "ellipsoid", "box", "file")


@dataclass(frozen=True, eq=False)
class Geometry:
    """Cubic-lattice voxelization of a dielectric body.

    ``voxel_centers`` has shape (N, 3). ``r_v`` and ``center`` describe the
    minimum ball enclosing the voxel centers.
    """

    voxel_centers: np.ndarray
    h: float
    r_v: float
    center: np.ndarray
    shape_tag: str = "points"

    def __post_init__(self):
        self.voxel_centers.setflags(write=False)
        self.center.setflags(write=False)

    @property
    def n_voxels(self):
        return self.voxel_centers.shape[0]

    @property
    def voxel_volume(self):
        return self.h**3

    @property
    def total_volume(self):
        return self.n_voxels * self.h**3

    @property
    def geometry_id(self):
        digest = hashlib.sha1(np.ascontiguousarray(self.voxel_centers).tobytes())
        digest.update(np.float64(self.h).tobytes())
        return digest.hexdigest()[:16]

    def lattice_indices(self):
        """Integer lattice coordinates of every voxel (origin at the minimum corner)."""
        rel = (self.voxel_centers - self.voxel_centers.min(axis=0)) / self.h
        idx = np.rint(rel).astype(np.int64)
        if np.max(np.abs(rel - idx), initial=0.0) > 1e-6:
            raise GeometryError("voxel centers do not lie on a cubic lattice of pitch h")
        return idx


def from_points(points, h, shape_tag="points"):
    """Build a :class:`Geometry` from explicit voxel centers."""
    h = check_positive(h, "h")
    pts = check_points(points, name="voxel centers", allow_empty=True)
    if pts.shape[0] == 0:
        raise EmptyVoxelizationError()
    if pts.shape[0] > 1:
        pair = cKDTree(pts).query_pairs(h * (1.0 - 1e-9), output_type="ndarray")
        if len(pair):
            i, j = pair[0]
            raise GeometryError(
                f"voxel centers {i} and {j} are closer than h={h} (distance "
                f"{np.linalg.norm(pts[i] - pts[j]):.6g})"
            )
    center, radius = min_enclosing_sphere(pts)
    return Geometry(pts, h, radius, center, shape_tag)


def _half_lattice(extent, h):
    n = int(np.ceil(extent / h)) + 1
    return (np.arange(-n, n) + 0.5) * h


def voxelize(shape_spec, h):
    """Voxelize a shape description.

    ``shape_spec`` is a mapping with key ``"shape"`` and the dimensions:
    ``{"shape": "sphere", "radius": R}``,
    ``{"shape": "ellipsoid", "axes": (a, b, c)}``,
    ``{"shape": "box", "sides": (lx, ly, lz)}`` or
    ``{"shape": "file", "path": p}``.

    Sphere and ellipsoid lattices sit at ``(i + 1/2) h`` around the origin;
    the box lattice starts at the box corner. A cell is kept when its
    center lies inside the shape.
    """
    h = check_positive(h, "h")
    spec = dict(shape_spec)
    shape = spec.get("shape")
    if shape not in SHAPES:
        raise ValidationError(f"unknown shape {shape!r}; expected one of {SHAPES}")

    if shape == "file":
        return from_points(read_voxel_file(spec["path"]), h, shape_tag=f"file:{Path(spec['path']).name}")

    if shape == "sphere":
        axes = (check_positive(spec["radius"], "radius"),) * 3
        tag = f"sphere(R={axes[0]:g})"
    elif shape == "ellipsoid":
        axes = tuple(check_positive(a, "semi-axis") for a in spec["axes"])
        tag = "ellipsoid(a={:g},b={:g},c={:g})".format(*axes)
    else:
        sides = tuple(check_positive(s, "side") for s in spec["sides"])
        tag = "box({:g}x{:g}x{:g})".format(*sides)

    if len(axes if shape != "box" else sides) != 3:
        raise ValidationError("three dimensions are required")

    if shape == "box":
        # floor with a relative guard so exact tilings keep their last cell
        counts = [int(np.floor(s / h * (1 + 1e-12) + 1e-12)) for s in sides]
        grids = [(np.arange(n) + 0.5) * h - s / 2 for n, s in zip(counts, sides)]
        X, Y, Z = np.meshgrid(*grids, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    else:
        grids = [_half_lattice(a, h) for a in axes]
        X, Y, Z = np.meshgrid(*grids, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        inside = ((pts / np.asarray(axes)) ** 2).sum(axis=1) <= 1.0
        pts = pts[inside]

    if pts.shape[0] == 0:
        raise EmptyVoxelizationError()
    center, radius = min_enclosing_sphere(pts)
    return Geometry(np.ascontiguousarray(pts), h, radius, center, tag)


def read_voxel_file(path):
    """Parse a UTF-8 voxel list with one ``x y z`` center per line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise VoxelFileError(path, None, f"cannot read file ({exc})") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise VoxelFileError(path, lineno, f"expected 3 coordinates, found {len(parts)}")
        try:
            xyz = [float(p) for p in parts]
        except ValueError as exc:
            raise VoxelFileError(path, lineno, f"not a number ({exc})") from exc
        if not all(np.isfinite(xyz)):
            raise VoxelFileError(path, lineno, "non-finite coordinate")
        rows.append(xyz)
    if not rows:
        raise EmptyVoxelizationError(f"empty voxelization: no coordinates in {path}")
    return np.array(rows, dtype=float)


def write_voxel_file(path, geom):
    lines = [f"# {geom.shape_tag} h={float(geom.h)!r} n={geom.n_voxels}"]
    lines += [" ".join(repr(float(c)) for c in row) for row in geom.voxel_centers]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- minimum enclosing ball -------------------------------------------------


def _ball_on_boundary(support):
    """Smallest ball with every support point on its boundary.

    Returns None when the support points are affinely dependent.
    """
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    Q = support[1:] - p0
    G = Q @ Q.T
    rhs = 0.5 * np.einsum("ij,ij->i", Q, Q)
    scale = np.trace(G)
    if scale == 0.0:
        return None
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return None
    if np.linalg.cond(G) > 1e12:
        return None
    c = p0 + lam @ Q
    return c, float(np.max(np.linalg.norm(support - c, axis=1)))


def _small_ball(support):
    """Minimum ball of at most four points by exhaustive search."""
    ball = _ball_on_boundary(support)
    if ball is not None:
        return ball
    best = None
    for size in range(1, len(support)):
        for sub in combinations(range(len(support)), size):
            cand = _ball_on_boundary(support[list(sub)])
            if cand is None:
                continue
            c, r = cand
            if np.all(np.linalg.norm(support - c, axis=1) <= r * (1 + 1e-12) + 1e-300):
                if best is None or r < best[1]:
                    best = (c, r)
        if best is not None:
            return best
    raise GeometryError("degenerate support set in minimum enclosing ball")


def min_enclosing_sphere(points, seed=0):
    """Exact minimum enclosing ball of a 3-D point set.

    Iterative form of Welzl's randomized algorithm with nested support
    loops. Only convex hull vertices can be support points, so the hull is
    taken first when it exists.
    """
    pts = check_points(points, allow_empty=True)
    if pts.shape[0] == 0:
        raise GeometryError("min_enclosing_sphere needs at least one point")
    pts = np.unique(pts, axis=0)
    if pts.shape[0] > 8:
        try:
            from scipy.spatial import ConvexHull

            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass  # flat or degenerate clouds fall through to the full set
    rng = np.random.default_rng(seed)
    pts = pts[rng.permutation(pts.shape[0])]
    span = float(np.max(np.ptp(pts, axis=0))) if len(pts) > 1 else 0.0
    tol = 1e-12 * max(span, 1e-300)

    def outside(c, r, p):
        return np.linalg.norm(p - c) > r + tol

    c, r = pts[0].copy(), 0.0
    for i in range(1, len(pts)):
        if not outside(c, r, pts[i]):
            continue
        c, r = pts[i].copy(), 0.0
        for j in range(i):
            if not outside(c, r, pts[j]):
                continue
            c, r = _small_ball(pts[[i, j]])
            for k in range(j):
                if not outside(c, r, pts[k]):
                    continue
                c, r = _small_ball(pts[[i, j, k]])
                for m in range(k):
                    if outside(c, r, pts[m]):
                        c, r = _small_ball(pts[[i, j, k, m]])
    r = max(r, float(np.max(np.linalg.norm(pts - c, axis=1))))
    return c, r


# --- surface meshes ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangulated closed surface with one-point panel quadrature data."""

    centroids: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    vertices: np.ndarray
    faces: np.ndarray
    radius: float | None = None
    tag: str = "mesh"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def panel_count(self):
        return self.areas.shape[0]

    @property
    def total_area(self):
        return float(np.sum(self.areas))

    def closure_defect(self):
        """|sum of area-weighted normals| relative to the total area."""
        return float(np.linalg.norm(self.areas @ self.normals) / self.total_area)

    def transformed(self, rotation=None, scale=1.0):
        Rm = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        rad = None if self.radius is None else self.radius * scale
        return SurfaceMesh(
            scale * self.centroids @ Rm.T,
            self.normals @ Rm.T,
            self.areas * scale**2,
            scale * self.vertices @ Rm.T,
            self.faces.copy(),
            rad,
            self.tag,
        )


_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)


def _unit_icosphere(subdivisions):
    t = (1.0 + 5.0**0.5) / 2.0
    V = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]],
        dtype=float,
    )
    V /= np.linalg.norm(V, axis=1)[:, None]
    F = _ICO_FACES.copy()
    for _ in range(subdivisions):
        edges = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
        edges.sort(axis=1)
        uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        mids = V[uniq[:, 0]] + V[uniq[:, 1]]
        mids /= np.linalg.norm(mids, axis=1)[:, None]
        m = inverse.reshape(3, -1) + len(V)
        ab, bc, ca = m
        a, b, c = F.T
        F = np.concatenate(
            [np.stack(x, axis=1) for x in ([a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca])]
        )
        V = np.vstack([V, mids])
    return V, F


def _flat_panels(V, F):
    T = V[F]
    cross = np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0])
    area = 0.5 * np.linalg.norm(cross, axis=1)
    return T.mean(axis=1), cross, area


def icosphere_mesh(R, subdivisions):
    """Icosahedron refined ``subdivisions`` times and projected to radius R.

    Panel centroids are projected onto the sphere and carry radial normals;
    panel areas are those of the flat triangles.
    """
    R = check_positive(R, "R")
    n = int(subdivisions)
    if n < 0 or n != subdivisions:
        raise ValidationError("subdivisions must be a non-negative integer")
    V, F = _unit_icosphere(n)
    centroid, _, area = _flat_panels(V, F)
    normals = centroid / np.linalg.norm(centroid, axis=1)[:, None]
    return SurfaceMesh(R * normals, normals, R**2 * area, R * V, F, R, f"icosphere(R={R:g},n={n})")


def ellipsoid_mesh(axes, subdivisions):
    """Icosphere mapped onto an ellipsoid; flat-face normals and areas."""
    axes = np.array([check_positive(a, "semi-axis") for a in axes])
    V, F = _unit_icosphere(int(subdivisions))
    V = V * axes
    centroid, cross, area = _flat_panels(V, F)
    normals = cross / np.linalg.norm(cross, axis=1)[:, None]
    flip = np.einsum("ij,ij->i", normals, centroid) < 0
    normals[flip] *= -1
    return SurfaceMesh(centroid, normals, area, V, F, None,
                       "ellipsoid_mesh(a={:g},b={:g},c={:g},n={})".format(*axes, int(subdivisions)))
