"""Shifted Legendre polynomials on [0, 1].

The degree-k shifted Legendre polynomial is the standard Legendre polynomial
evaluated at 2t - 1, so the family is orthogonal on [0, 1] with squared norm
1/(2k + 1).  Besides plain evaluation this module provides the running
antiderivative from 0 and the tridiagonal table of cross-integrals between
antiderivatives; both are what the polynomial expansion of the Brownian
bridge and its Levy-area truncation consume.
"""

from __future__ import annotations

import numpy as np


def _check_unit_interval(t) -> np.ndarray:
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"argument must lie in [0, 1], got {t!r}")
    return arr


def shifted_legendre(k: int, t):
    """Evaluate the degree-k shifted Legendre polynomial at t in [0, 1].

    Uses the Bonnet three-term recurrence at x = 2t - 1, which is stable
    for degrees well beyond anything needed here.  Accepts scalars or
    arrays and returns a matching float/ndarray.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    arr = _check_unit_interval(t)
    x = 2.0 * arr - 1.0
    if k == 0:
        out = np.ones_like(x)
    elif k == 1:
        out = x
    else:
        p_prev = np.ones_like(x)
        p_cur = x
        for j in range(2, k + 1):
            p_prev, p_cur = p_cur, ((2 * j - 1) * x * p_cur - (j - 1) * p_prev) / j
        out = p_cur
    return out if isinstance(t, np.ndarray) else float(out)


def shifted_legendre_all(k_max: int, t) -> np.ndarray:
    """Table of shifted Legendre values for degrees 0..k_max.

    Returns an array of shape (k_max + 1, len(t)); one recurrence pass
    covers all degrees, so the cost is O(k_max * len(t)).
    """
    if k_max < 0:
        raise ValueError("degree must be non-negative")
    x = 2.0 * np.atleast_1d(_check_unit_interval(t)) - 1.0
    table = np.empty((k_max + 1, x.size))
    table[0] = 1.0
    if k_max >= 1:
        table[1] = x
    for j in range(2, k_max + 1):
        table[j] = ((2 * j - 1) * x * table[j - 1] - (j - 1) * table[j - 2]) / j
    return table


def shifted_legendre_antiderivative(k: int, t):
    """Integral of the degree-k shifted Legendre polynomial from 0 to t.

    Computed from the exact identity relating the antiderivative to the
    neighbouring polynomials of degree k + 1 and k - 1; requires k >= 1
    (the degree-0 antiderivative is just t and never arises here).
    """
    if k < 1:
        raise ValueError("antiderivative identity requires degree k >= 1")
    arr = _check_unit_interval(t)
    out = (shifted_legendre(k + 1, arr) - shifted_legendre(k - 1, arr)) / (2.0 * (2 * k + 1))
    return out if isinstance(t, np.ndarray) else float(out)


def antiderivative_all(k_max: int, t) -> np.ndarray:
    """Antiderivative table for degrees 1..k_max, shape (k_max, len(t))."""
    if k_max < 1:
        raise ValueError("need at least degree 1")
    q = shifted_legendre_all(k_max + 1, t)
    ks = np.arange(1, k_max + 1)
    return (q[2:] - q[:-2]) / (2.0 * (2 * ks + 1))[:, None]


def antiderivative_cross_integral(k: int, l: int) -> float:
    """Stieltjes cross-integral of antiderivative k against antiderivative l.

    The value of int_0^1 (int_0^t Q_k) d(int_0^t Q_l); nonzero only for
    |k - l| = 1, which is what collapses the polynomial Levy-area series
    to nearest-neighbour coefficient products.
    """
    if k < 1 or l < 1:
        raise ValueError("cross-integral requires degrees k, l >= 1")
    if l == k + 1:
        return 1.0 / (2.0 * (2 * k + 1) * (2 * k + 3))
    if l == k - 1:
        return -1.0 / (2.0 * (2 * k + 1) * (2 * k - 1))
    return 0.0


def gauss_legendre_rule(n: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on [a, b]."""
    if n < 1:
        raise ValueError("need at least one node")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (b - a) * nodes + 0.5 * (b + a)
    w = 0.5 * (b - a) * weights
    return x, w
