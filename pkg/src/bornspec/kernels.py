"""Pointwise integral kernels and their self-cell regularizations.

Every kernel comes in two flavours: a per-pair function taking two points
(validated, raises on coincident points) and a vectorized ``*_blocks``
function taking an array of separation vectors, used by the assembly code.
Time convention is exp(+i omega t), so outgoing waves carry exp(-i k d).
"""

import numpy as np
from scipy import integrate

from ._validation import check_positive
from .errors import SelfTermError, ValidationError

_EYE = np.eye(3)
_FOUR_PI = 4.0 * np.pi


def _separation(r, rp):
    r = np.asarray(r, dtype=float).reshape(3)
    rp = np.asarray(rp, dtype=float).reshape(3)
    d = r - rp
    if not np.any(d):
        raise SelfTermError("self-term must use static_self_term")
    return d


def _check_k(k, *, strict=False):
    return check_positive(k, "k", allow_zero=not strict)


def _unit_and_distance(dvec):
    dist = np.sqrt(np.einsum("...i,...i->...", dvec, dvec))
    if np.any(dist == 0):
        raise SelfTermError("self-term must use static_self_term")
    return dvec / dist[..., None], dist


def _outer(u):
    return u[..., :, None] * u[..., None, :]


def one_minus_phase(x):
    """1 - exp(-ix), accurate for small x."""
    return -np.expm1(-1j * np.asarray(x, dtype=float))


def one_minus_phase_linear(x):
    """1 - exp(-ix)(1 + ix), accurate for small x.

    For |x| < 0.5 the Taylor series sum_{n>=2} (n-1)(-i)^n x^n / n! is
    used; it converges to full precision within 25 terms there.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 0.5
    xs = x[small]
    acc = np.zeros(xs.shape, dtype=complex)
    term = np.ones(xs.shape, dtype=complex)  # (-i x)^n / n!
    for n in range(1, 26):
        term = term * (-1j * xs) / n
        if n >= 2:
            acc += (n - 1) * term
    out[small] = acc
    xb = x[~small]
    out[~small] = 1.0 - np.exp(-1j * xb) * (1.0 + 1j * xb)
    return out


# --- static dipole kernel ---------------------------------------------------


def static_dipole_blocks(dvec):
    """(3 uu^T - 1) / (4 pi d^3) for separation vectors of shape (..., 3)."""
    u, dist = _unit_and_distance(np.asarray(dvec, dtype=float))
    return (3.0 * _outer(u) - _EYE) / (_FOUR_PI * dist**3)[..., None, None]


def static_dipole_kernel(r, rp):
    return static_dipole_blocks(_separation(r, rp))


def static_self_term():
    """Depolarization block of a cubic cell."""
    return -_EYE / 3.0


# --- dynamic correction -----------------------------------------------------


def gamma_sharp_blocks(dvec, k):
    k = _check_k(k)
    u, dist = _unit_and_distance(np.asarray(dvec, dtype=float))
    phase = np.exp(-1j * k * dist)
    pref = k**2 / (_FOUR_PI * dist)
    uu = _outer(u)
    return pref[..., None, None] * (
        phase[..., None, None] * _EYE + one_minus_phase(k * dist)[..., None, None] * uu
    )


def gamma_sharpsharp_blocks(dvec, k):
    k = _check_k(k)
    u, dist = _unit_and_distance(np.asarray(dvec, dtype=float))
    coef = one_minus_phase_linear(k * dist) / (_FOUR_PI * dist**3)
    return coef[..., None, None] * (_EYE - 3.0 * _outer(u))


def gamma_blocks(dvec, k):
    """Dynamic correction kernel evaluated as the sum of its two parts."""
    return gamma_sharp_blocks(dvec, k) + gamma_sharpsharp_blocks(dvec, k)


def gamma_sharp_kernel(r, rp, k):
    return gamma_sharp_blocks(_separation(r, rp), k)


def gamma_sharpsharp_kernel(r, rp, k):
    return gamma_sharpsharp_blocks(_separation(r, rp), k)


def gamma_kernel(r, rp, k):
    """Full dynamic correction block from its single closed expression.

    Kept independent of the split evaluation so the two can be compared.
    The expression cancels in double precision, with relative error about
    1e-16 / (kd)^2, so it is only a cross-check for moderate kd.
    """
    k = _check_k(k)
    d = _separation(r, rp)
    if k == 0:
        return np.zeros((3, 3), dtype=complex)
    dist = np.linalg.norm(d)
    u = d / dist
    x = k * dist
    e = np.exp(-1j * x)
    a = e + (1.0 - e * (1.0 + 1j * x)) / x**2
    b = 3.0 * (e * (1.0 + 1j * x) - 1.0) / x**2 - (e - 1.0)
    return k**2 / (_FOUR_PI * dist) * (a * _EYE + b * np.outer(u, u))


def _radial_integral(func, a):
    val, _ = integrate.quad(func, 0.0, a, complex_func=True, epsabs=0.0, epsrel=1e-13, limit=200)
    return complex(val)


def equivalent_radius(cell_volume):
    cell_volume = check_positive(cell_volume, "cell_volume")
    return (3.0 * cell_volume / _FOUR_PI) ** (1.0 / 3.0)


def gamma_self_coefficient(k, cell_volume):
    """Isotropic self-cell integral of the dynamic correction over the equivalent ball."""
    k = _check_k(k)
    a = equivalent_radius(cell_volume)
    if k == 0:
        return 0.0 + 0.0j

    def integrand(d):
        e = np.exp(-1j * k * d)
        return k**2 * d * (e + (1.0 - e) / 3.0)

    return _radial_integral(integrand, a)


def gamma_self_term(k, cell_volume):
    return gamma_self_coefficient(k, cell_volume) * _EYE.astype(complex)


# --- scalar acoustic kernel -------------------------------------------------


def acoustic_blocks(dist, k):
    k = _check_k(k, strict=True)
    dist = np.asarray(dist, dtype=float)
    if np.any(dist == 0):
        raise SelfTermError("self-term must use acoustic_self_term")
    return k**2 * np.exp(-1j * k * dist) / (_FOUR_PI * dist)


def acoustic_kernel(r, rp, k):
    d = np.asarray(r, dtype=float).reshape(3) - np.asarray(rp, dtype=float).reshape(3)
    if not np.any(d):
        raise SelfTermError("self-term must use acoustic_self_term")
    return complex(acoustic_blocks(np.linalg.norm(d), k))


def acoustic_self_term(k, cell_volume):
    k = _check_k(k, strict=True)
    a = equivalent_radius(cell_volume)
    return _radial_integral(lambda d: k**2 * d * np.exp(-1j * k * d), a)


KERNEL_KINDS = ("static", "gamma", "green", "acoustic")


def check_kind(kind):
    if kind not in KERNEL_KINDS:
        raise ValidationError(f"unknown kernel kind {kind!r}; expected one of {KERNEL_KINDS}")
    return kind
