"""Real solid harmonics as exact homogeneous polynomials.

A polynomial is a dict mapping exponent triples (a, b, c) to coefficients of
x^a y^b z^c. Polynomials built here are the regular solid harmonics
r^l Y_lm with real, orthonormal (on the unit sphere) Y_lm.
"""

from functools import lru_cache
import math

import numpy as np


def _add(p, q, scale=1.0):
    out = dict(p)
    for key, val in q.items():
        out[key] = out.get(key, 0.0) + scale * val
    return out


def _scale(p, s):
    return {key: s * val for key, val in p.items()}


def _mul_var(p, axis):
    out = {}
    for (a, b, c), val in p.items():
        e = [a, b, c]
        e[axis] += 1
        out[tuple(e)] = out.get(tuple(e), 0.0) + val
    return out


def _mul_r2(p):
    return _add(_add(_mul_var(_mul_var(p, 0), 0), _mul_var(_mul_var(p, 1), 1)), _mul_var(_mul_var(p, 2), 2))


@lru_cache(maxsize=None)
def _racah_table(lmax):
    """Racah-normalized real solid harmonics S_lm, l <= lmax, by recurrence."""
    S = {(0, 0): {(0, 0, 0): 1.0}}
    for l in range(lmax):
        f = math.sqrt((2 if l == 0 else 1) * (2 * l + 1) / (2 * l + 2))
        sll = S[(l, l)]
        slm = S[(l, -l)]
        if l == 0:
            S[(1, 1)] = _scale(_mul_var(sll, 0), f)
            S[(1, -1)] = _scale(_mul_var(sll, 1), f)
        else:
            S[(l + 1, l + 1)] = _scale(_add(_mul_var(sll, 0), _mul_var(slm, 1), -1.0), f)
            S[(l + 1, -l - 1)] = _scale(_add(_mul_var(sll, 1), _mul_var(slm, 0)), f)
        for m in range(-l, l + 1):
            term = _scale(_mul_var(S[(l, m)], 2), 2 * l + 1)
            if abs(m) <= l - 1:
                term = _add(term, _mul_r2(S[(l - 1, m)]), -math.sqrt((l + m) * (l - m)))
            S[(l + 1, m)] = _scale(term, 1.0 / math.sqrt((l + m + 1) * (l - m + 1)))
    return {key: {e: v for e, v in p.items() if v != 0.0} for key, p in S.items()}


def solid_harmonic(l, m):
    """Polynomial for r^l Y_lm (real, orthonormal Y)."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic indices l={l}, m={m}")
    norm = math.sqrt((2 * l + 1) / (4 * math.pi))
    return _scale(_racah_table(l)[(l, m)], norm)


def gradient(p):
    grads = [{}, {}, {}]
    for (a, b, c), val in p.items():
        e = (a, b, c)
        for axis in range(3):
            if e[axis] == 0:
                continue
            d = list(e)
            d[axis] -= 1
            g = grads[axis]
            g[tuple(d)] = g.get(tuple(d), 0.0) + e[axis] * val
    return grads


def evaluate(p, points):
    pts = np.asarray(points, dtype=float)
    if not p:
        return np.zeros(pts.shape[0])
    deg = max(max(e) for e in p)
    powers = [np.vander(pts[:, axis], deg + 1, increasing=True) for axis in range(3)]
    out = np.zeros(pts.shape[0])
    for (a, b, c), val in p.items():
        out += val * powers[0][:, a] * powers[1][:, b] * powers[2][:, c]
    return out


def evaluate_gradient(p, points):
    """Gradient of p at points, shape (n, 3)."""
    return np.stack([evaluate(g, points) for g in gradient(p)], axis=1)


def complex_from_real(l, m, values):
    """Combine real harmonic samples into the complex Y_lm (Condon-Shortley phase).

    ``values`` maps each m' in [-l, l] to samples of the real harmonic.
    """
    if m == 0:
        return values[0].astype(complex)
    a = abs(m)
    if m > 0:
        return (-1) ** a * (values[a] + 1j * values[-a]) / math.sqrt(2.0)
    return (values[a] - 1j * values[-a]) / math.sqrt(2.0)
