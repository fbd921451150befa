"""Analytic sphere oracles: static spectrum, series constants, mode fields, Green functions."""

from dataclasses import dataclass
import math

import numpy as np

from . import harmonics
from ._validation import check_points, check_positive
from .errors import ValidationError

L_CAP = 1_000_000


@dataclass(frozen=True)
class MieMode:
    l: int
    m: int
    radius: float = 1.0

    @property
    def eigenvalue(self):
        return -self.l / (2 * self.l + 1)

    @property
    def multiplicity(self):
        return 2 * self.l + 1


def static_eigenvalue(l):
    return -l / (2 * l + 1)


def static_spectrum(l_max):
    """[(eigenvalue, multiplicity)] for l = 1..l_max."""
    l_max = int(l_max)
    if l_max < 1:
        raise ValidationError("l_max must be >= 1")
    return [(static_eigenvalue(l), 2 * l + 1) for l in range(1, l_max + 1)]


# --- zeta values and series constants ---------------------------------------


def zeta(s, n_direct=64):
    """Riemann zeta for real s > 1.

    Direct summation of the first terms plus an Euler-Maclaurin tail with
    Bernoulli corrections up to B_10; accurate to ~1e-16 for s >= 2.
    """
    if s <= 1:
        raise ValidationError("zeta(s) needs s > 1")
    N = n_direct
    head = math.fsum(n**-s for n in range(N - 1, 0, -1))
    # tail from N: integral + half endpoint + Bernoulli corrections
    bern = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66)
    terms = [N ** (1 - s) / (s - 1), 0.5 * N**-s]
    rising = s  # s (s+1) ... (s+2j-2)
    for j, b in enumerate(bern, start=1):
        terms.append(b / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1))
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + math.fsum(terms)


def c3_closed():
    return 7.0 * zeta(3) / 8.0 - 1.0


def c5_closed():
    return 7.0 * zeta(3) / 32.0 + 31.0 * zeta(5) / 128.0 - math.pi**4 / 192.0


def c3_partial(L):
    L = _check_L(L)
    n = 2.0 * np.arange(L, 0, -1, dtype=float) + 1.0
    return math.fsum(1.0 / n**3)


def c5_partial(L):
    L = _check_L(L)
    l = np.arange(L, 0, -1, dtype=float)
    return math.fsum(l**2 / (2.0 * l + 1.0) ** 5)


def _check_L(L):
    L = int(L)
    if not 1 <= L <= L_CAP:
        raise ValidationError(f"truncation L must lie in [1, {L_CAP}]")
    return L


def series_constants(L=L_CAP):
    """Closed forms and partial sums of sum 1/(2l+1)^3 and sum l^2/(2l+1)^5."""
    return {
        "c3": c3_closed(),
        "c5": c5_closed(),
        "c3_partial": c3_partial(L),
        "c5_partial": c5_partial(L),
        "L": int(L),
    }


# --- mode fields -------------------------------------------------------------


def f_mode_eval(l, m, R, points, *, complex_basis=False):
    """Normalized static mode (l R^{2l+1})^{-1/2} grad(r^l Y_lm) at points inside the ball.

    Real harmonics by default; ``complex_basis=True`` returns the complex
    Y_lm version.
    """
    l, m = int(l), int(m)
    if l < 1 or abs(m) > l:
        raise ValidationError(f"invalid mode indices l={l}, m={m}")
    R = check_positive(R, "R")
    pts = check_points(points)
    if np.any(np.linalg.norm(pts, axis=1) > R * (1 + 1e-12)):
        raise ValidationError("f_mode_eval points must lie inside the ball")
    norm = 1.0 / math.sqrt(l * R ** (2 * l + 1))
    if not complex_basis:
        return norm * harmonics.evaluate_gradient(harmonics.solid_harmonic(l, m), pts)
    comps = {mm: harmonics.evaluate_gradient(harmonics.solid_harmonic(l, mm), pts) for mm in {m, -m}}
    return norm * harmonics.complex_from_real(l, m, comps)


# --- sphere Green functions --------------------------------------------------


def legendre_table(x, L):
    """P_0..P_L at x via the three-term recurrence, shape (L+1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    P = np.empty((L + 1,) + x.shape)
    P[0] = 1.0
    if L >= 1:
        P[1] = x
    for l in range(1, L):
        P[l + 1] = ((2 * l + 1) * x * P[l] - l * P[l - 1]) / (l + 1)
    return P


def _pair(r, rp, R):
    r = np.asarray(r, dtype=float).reshape(3)
    rp = np.asarray(rp, dtype=float).reshape(3)
    R = check_positive(R, "R")
    nr, nrp = np.linalg.norm(r), np.linalg.norm(rp)
    if nr > R * (1 + 1e-12) or nrp > R * (1 + 1e-12):
        raise ValidationError("points must lie in the closed ball")
    return r, rp, R, nr, nrp


def _cos_angle(r, rp, nr, nrp):
    if nr == 0 or nrp == 0:
        return 0.0
    return float(np.clip(np.dot(r, rp) / (nr * nrp), -1.0, 1.0))


def sphere_g_closed(r, rp, R):
    """Closed form of the regular part of the symmetrized sphere Green function."""
    r, rp, R, nr, nrp = _pair(r, rp, R)
    rho = nr * nrp / R**2
    x = _cos_angle(r, rp, nr, nrp)
    dist = math.sqrt(max(1.0 - 2.0 * rho * x + rho * rho, 0.0))
    denom = 1.0 - rho * x + dist
    if denom <= 0.0:
        raise ValidationError("coincident boundary points: logarithmic divergence")
    return (math.log(2.0 / denom) - 1.0) / (4.0 * math.pi * R)


def sphere_g_series(r, rp, R, L):
    r, rp, R, nr, nrp = _pair(r, rp, R)
    L = _check_L(L)
    rho = nr * nrp / R**2
    P = legendre_table(_cos_angle(r, rp, nr, nrp), L)
    l = np.arange(1, L + 1)
    return (-1.0 + math.fsum(rho**l * P[1:] / l)) / (4.0 * math.pi * R)


def gdgn_series(r, rp, R, L):
    """Partial sums of the Dirichlet and Neumann sphere Green functions."""
    r, rp, R, nr, nrp = _pair(r, rp, R)
    if np.allclose(r, rp, rtol=0, atol=1e-15 * R):
        raise ValidationError("gdgn_series needs r != r'")
    L = _check_L(L)
    r_lt, r_gt = min(nr, nrp), max(nr, nrp)
    P = legendre_table(_cos_angle(r, rp, nr, nrp), L)[1:]
    l = np.arange(1, L + 1, dtype=float)
    inner = (r_lt / r_gt) ** l
    image = (nr * nrp) ** l * r_gt / R ** (2 * l + 1)
    base = 1.0 / (4.0 * math.pi * r_gt)
    gd = base - 1.0 / (4.0 * math.pi * R) + base * math.fsum(P * (inner - image))
    gn = base + base * math.fsum(P * (inner + (l + 1) / l * image))
    return {"G_D": gd, "G_N": gn}


def normal_G_series(cos_gamma, R, L):
    """(1 / 4 pi R^2) sum_{l=1}^{L} P_l(cos gamma) / (2l + 1)."""
    x = np.asarray(cos_gamma, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise ValidationError("|cos gamma| must not exceed 1")
    R = check_positive(R, "R")
    L = _check_L(L)
    x = np.clip(x, -1.0, 1.0)
    if x.ndim == 0 and L > 10_000:
        # scalar, long series: stream the recurrence
        p_prev, p = 1.0, float(x)
        acc = [p / 3.0]
        for l in range(1, L):
            p_prev, p = p, ((2 * l + 1) * float(x) * p - l * p_prev) / (l + 1)
            acc.append(p / (2 * l + 3))
        return math.fsum(reversed(acc)) / (4.0 * math.pi * R**2)
    P = legendre_table(x, L)[1:]
    w = 1.0 / (2.0 * np.arange(1, L + 1) + 1.0)
    w = w.reshape((L,) + (1,) * x.ndim)
    return np.sum(P * w, axis=0) / (4.0 * math.pi * R**2)
