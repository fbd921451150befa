"""Norm bounds for the dynamic correction and the I[V] functional."""

from dataclasses import asdict, dataclass
import math

import numpy as np

from ._validation import check_positive
from .errors import ValidationError
from .geometry import Geometry
from .kernels import equivalent_radius


def _inputs(k, volume, r_v):
    return (
        check_positive(k, "k", allow_zero=True),
        check_positive(volume, "volume"),
        check_positive(r_v, "r_v"),
    )


def opnorm_bounds(k, volume, r_v):
    """Bounds on the real part, imaginary part and whole of the dynamic correction."""
    k, V, R = _inputs(k, volume, r_v)
    kv = k**3 * V
    re = min(3.0 / (5.0 * math.pi) * kv ** (2.0 / 3.0), 3.0 * math.sqrt(2.0) * k * R)
    im = min(kv / (4.0 * math.pi), 3.0 / (5.0 * math.pi) * kv ** (2.0 / 3.0), 5.0 / 8.0 * k * R)
    return {"re_bound": re, "im_bound": im, "combined": re + im}


def gamma_hs_bound(k, volume, r_v):
    k, V, R = _inputs(k, volume, r_v)
    return min(2.0 / math.pi * (k**3 * V) ** (2.0 / 3.0), 1.5 * (k * R) ** 2)


def i_functional_hls(volume):
    V = check_positive(volume, "volume")
    return (math.sqrt(2.0) * math.pi * V) ** (2.0 / 3.0)


def i_functional_direct(geom: Geometry, chunk_pairs=2_000_000):
    """sqrt of the voxel pair sum of h^6 / d^2 with an equivalent-ball self term."""
    P = geom.voxel_centers
    N = geom.n_voxels
    h3 = geom.voxel_volume
    partial = []
    rows = max(1, chunk_pairs // N)
    for s in range(0, N, rows):
        e = min(N, s + rows)
        d = P[s:e, None, :] - P[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        idx = np.arange(s, e)
        r2[idx - s, idx] = np.inf
        partial.append(float(np.sum(1.0 / r2)))
    pair_sum = math.fsum(partial) * h3 * h3
    self_sum = N * h3 * 4.0 * math.pi * equivalent_radius(h3)
    return math.sqrt(pair_sum + self_sum)


def voxel_transform(geom: Geometry, q):
    """Fourier transform of the voxel indicator at wave vectors q (shape (n, 3)).

    h^3 sum_i exp(i q.r_i) times the cube factor prod_a sinc(q_a h / 2).
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    h = geom.h
    cell = h**3 * np.prod(np.sinc(q * h / (2.0 * np.pi)), axis=1)
    out = np.empty(q.shape[0], dtype=complex)
    step = max(1, 4_000_000 // geom.n_voxels)
    for s in range(0, q.shape[0], step):
        phase = q[s : s + step] @ geom.voxel_centers.T
        out[s : s + step] = np.exp(1j * phase).sum(axis=1)
    return cell * out


def ball_transform(q_norm, R):
    """4 pi R^3 j1(qR) / (qR) for the indicator of a ball."""
    x = np.asarray(q_norm, dtype=float) * R
    out = np.full(x.shape, 4.0 * math.pi * R**3 / 3.0)
    nz = x > 1e-4
    xs = x[nz]
    j1 = np.sin(xs) / xs**2 - np.cos(xs) / xs
    out[nz] = 4.0 * math.pi * R**3 * j1 / xs
    return out


def _sample_radial(rng, n, scale):
    """Draw from the density proportional to 1 / (1 + (q/scale)^4) on q >= 0.

    Rejection from the half-Cauchy law; the envelope ratio
    (1 + t^2) / (1 + t^4) never exceeds (1 + sqrt 2) / 2.
    """
    bound = (1.0 + math.sqrt(2.0)) / 2.0
    out = np.empty(0)
    while out.size < n:
        t = np.abs(np.tan(0.5 * math.pi * rng.random(2 * n)))
        keep = rng.random(t.size) * bound < (1.0 + t**2) / (1.0 + t**4)
        out = np.concatenate([out, t[keep]])
    return out[:n] * scale


def i_functional_fourier(geom: Geometry, sample_count=20_000, seed=0):
    """Monte-Carlo estimate of I[V] from the squared indicator transform.

    I^2 = int |F(q)|^2 / (4 pi |q|) d^3q. Returns (estimate, standard error).
    """
    n = int(sample_count)
    if n < 10_000:
        raise ValidationError("sample_count must be at least 1e4")
    rng = np.random.default_rng(seed)
    scale = 1.0 / geom.r_v if geom.r_v > 0 else 1.0 / geom.h
    q = _sample_radial(rng, n, scale)
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    F = voxel_transform(geom, q[:, None] * u)
    pdf = (2.0 * math.sqrt(2.0) / math.pi) * scale**3 / (scale**4 + q**4)
    # |F|^2 / (4 pi q) * q^2 * 4 pi / pdf
    values = np.abs(F) ** 2 * q / pdf
    mean = float(values.mean())
    err = float(values.std(ddof=1) / math.sqrt(n))
    est = math.sqrt(max(mean, 0.0))
    return est, err / (2.0 * est) if est > 0 else float("inf")


def series_upper_bound(surface_hs_value, gamma_hs, gamma_op):
    """Square of sqrt(surface term) + gamma_hs (13 + 12 gamma_op + 4 gamma_op^2)."""
    for name, val in (("surface_hs_value", surface_hs_value), ("gamma_hs", gamma_hs), ("gamma_op", gamma_op)):
        check_positive(val, name, allow_zero=True)
    total = math.sqrt(max(surface_hs_value, 0.0)) + gamma_hs * (13.0 + 12.0 * gamma_op + 4.0 * gamma_op**2)
    return total**2


@dataclass
class BoundsReport:
    k: float
    volume: float
    r_v: float
    re_bound: float
    im_bound: float
    gamma_opnorm_bound: float
    gamma_hs_bound: float
    i_direct: float
    i_hls: float
    i_fourier: float | None = None
    i_fourier_stderr: float | None = None
    surface_hs_value: float | None = None
    series_upper: float | None = None
    discrete_gamma_hs: float | None = None

    def to_dict(self):
        return asdict(self)


def bounds_report(geom: Geometry, k, *, discrete_gamma_hs=None, surface_hs_value=None,
                  fourier_samples=None, seed=0):
    V, R = geom.total_volume, geom.r_v
    if R == 0:
        R = equivalent_radius(V)
    op = opnorm_bounds(k, V, R)
    hs = gamma_hs_bound(k, V, R)
    rep = BoundsReport(
        k=float(k), volume=V, r_v=R,
        re_bound=op["re_bound"], im_bound=op["im_bound"], gamma_opnorm_bound=op["combined"],
        gamma_hs_bound=hs, i_direct=i_functional_direct(geom), i_hls=i_functional_hls(V),
        discrete_gamma_hs=discrete_gamma_hs, surface_hs_value=surface_hs_value,
    )
    if fourier_samples:
        rep.i_fourier, rep.i_fourier_stderr = i_functional_fourier(geom, fourier_samples, seed)
    if surface_hs_value is not None:
        rep.series_upper = series_upper_bound(surface_hs_value, hs, op["combined"])
    return rep
