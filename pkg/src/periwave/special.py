"""Bessel function J0 without an external special-function dependency.

Power series for ``|x| <= 12`` and the Hankel asymptotic expansion beyond.
"""
import math

import numpy as np

SERIES_CUTOFF = 12.0

_EPS = np.finfo(float).eps


def j0_series(x, max_terms=200):
    """J0 by its power series, summed until the terms drop below machine
    precision relative to the partial sum."""
    x = np.asarray(x, dtype=float)
    q = -(0.5 * x) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, max_terms):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.maximum(np.abs(total), _EPS)):
            break
    return total


def _hankel_pq(x):
    """Asymptotic P0, Q0 and a bound on the truncation error."""
    x = np.asarray(x, dtype=float)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    bound = np.zeros_like(x)
    # a_k = prod_{j=1..k} (0 - (2j-1)^2) / (k! 8^k), applied as a_k / x^k
    coeff = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    last = np.ones_like(x)
    for k in range(1, 40):
        coeff = coeff * (-(2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(coeff)
        # stop at the smallest term of the divergent series
        active &= mag < last
        if not np.any(active):
            break
        # P collects even k, Q odd k with alternating signs:
        # P = sum (-1)^m a_{2m}/x^{2m},  Q = sum (-1)^m a_{2m+1}/x^{2m+1}
        m = k // 2
        sign = -1.0 if m % 2 else 1.0
        contrib = np.where(active, sign * coeff, 0.0)
        if k % 2 == 0:
            p = p + contrib
        else:
            q = q + contrib
        bound = np.where(active, mag, bound)
        last = np.where(active, mag, last)
        if np.all(mag < _EPS):
            break
    return p, q, bound


def j0_asymptotic(x):
    """J0 by the Hankel expansion; accurate for large ``x``."""
    x = np.abs(np.asarray(x, dtype=float))
    p, q, _ = _hankel_pq(x)
    phase = x - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(phase) - q * np.sin(phase))


def j0_asymptotic_error_bound(x):
    """Bound on the absolute truncation error of :func:`j0_asymptotic`."""
    x = np.abs(np.asarray(x, dtype=float))
    _, _, bound = _hankel_pq(x)
    return np.sqrt(2.0 / (math.pi * x)) * 2.0 * bound


def j0(x):
    """Bessel function of the first kind of order zero."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if np.any(small):
        out[small] = j0_series(x[small])
    if np.any(~small):
        out[~small] = j0_asymptotic(x[~small])
    return out if out.ndim else float(out)
