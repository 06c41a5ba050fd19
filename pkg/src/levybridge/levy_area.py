"""Levy-area truncations, their exact mean-squared errors and cheap samplers.

Three truncated series for the Levy area of d-dimensional Brownian motion on
[0, 1] are implemented: the Fourier one (uses the correlated constant
coefficient), the Kloeden-Platen-Wright variant (independent coefficients
only, three times the error constant) and the polynomial one built from
shifted-Legendre coefficients.  Every truncation has a closed-form per-entry
mean-squared error, which is what the Monte Carlo harness validates.

Alongside the truncations there is the one-term covariance-matched sampler:
half the increment/first-coefficient wedge plus an independent antisymmetric
Gaussian matrix whose variance reproduces the discarded tail, either with a
constant 1/12 per entry or conditionally on the first coefficient (variance
1/20 + (c^i^2 + c^j^2)/20).  Rescaling that sampler to subintervals and
re-attaching the chord areas gives a fine discretisation whose total matches
the whole-interval law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_core import (
    KIND_FOURIER,
    KIND_POLY,
    CoefficientSet,
    RngStream,
    fourier_ab_block,
    increment_block,
    normals_batch,
    poly_coeff_block,
)
from .zeta_moments import inverse_square_tail

METHOD_FOURIER = "fourier"
METHOD_KPW = "kpw"
METHOD_POLY = "poly"
METHODS = (METHOD_FOURIER, METHOD_KPW, METHOD_POLY)

VARIANT_DAVIE = "davie"
VARIANT_FOSTER = "foster"
VARIANTS = (VARIANT_DAVIE, VARIANT_FOSTER)

_PI_SQ = math.pi * math.pi
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class AntisymMatrix:
    """Dense antisymmetric matrix; holds a Levy area or an approximation."""

    entries: np.ndarray

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not np.array_equal(e, -e.T):
            raise ValueError("matrix is not exactly antisymmetric")

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self.entries[i, j])


def _antisymmetrize(raw: np.ndarray) -> AntisymMatrix:
    # strict upper triangle is authoritative; mirroring enforces exactness
    upper = np.triu(raw, 1)
    return AntisymMatrix(entries=upper - upper.T)


def _wedge(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.outer(x, y) - np.outer(y, x)


def _check_fourier_coeffs(coeffs: CoefficientSet, n: int) -> None:
    if coeffs.kind != KIND_FOURIER:
        raise ValueError("needs a fourier coefficient set")
    if n < 1:
        raise ValueError("truncation level must be positive")
    if coeffs.order < n - 1:
        raise ValueError(f"coefficient order {coeffs.order} too small for level {n}")


def levy_area_fourier(coeffs: CoefficientSet, n: int) -> AntisymMatrix:
    """Fourier Levy-area truncation at level n.

    Half the wedge of the constant coefficient with the increment plus the
    weighted wedges of the cosine/sine pairs up to index n - 1.
    """
    _check_fourier_coeffs(coeffs, n)
    raw = 0.5 * _wedge(coeffs.a0, coeffs.w1)
    for k in range(1, n):
        raw += math.pi * k * _wedge(coeffs.a[k - 1], coeffs.b[k - 1])
    return _antisymmetrize(raw)


def levy_area_kpw(coeffs: CoefficientSet, n: int) -> AntisymMatrix:
    """Kloeden-Platen-Wright truncation at level n.

    Replaces the correlated constant coefficient by the increment inside
    each sine coefficient, so only independent Gaussians are consumed.
    """
    _check_fourier_coeffs(coeffs, n)
    d = coeffs.d
    raw = np.zeros((d, d))
    for k in range(1, n):
        shifted = coeffs.b[k - 1] - coeffs.w1 / (k * math.pi)
        raw += math.pi * k * _wedge(coeffs.a[k - 1], shifted)
    return _antisymmetrize(raw)


def levy_area_poly(coeffs: CoefficientSet, n: int) -> AntisymMatrix:
    """Polynomial Levy-area truncation at level n (level 0 is the zero matrix)."""
    if coeffs.kind != KIND_POLY:
        raise ValueError("needs a poly coefficient set")
    if n < 0:
        raise ValueError("truncation level must be non-negative")
    if coeffs.order < max(n, 1):
        raise ValueError(f"coefficient order {coeffs.order} too small for level {n}")
    d = coeffs.d
    if n == 0:
        return AntisymMatrix(entries=np.zeros((d, d)))
    raw = 0.5 * _wedge(coeffs.w1, coeffs.c[0])
    for k in range(1, n):
        raw += 0.5 * _wedge(coeffs.c[k - 1], coeffs.c[k])
    return _antisymmetrize(raw)


def levy_area(method: str, coeffs: CoefficientSet, n: int) -> AntisymMatrix:
    """Dispatch on the method name."""
    if method == METHOD_FOURIER:
        return levy_area_fourier(coeffs, n)
    if method == METHOD_KPW:
        return levy_area_kpw(coeffs, n)
    if method == METHOD_POLY:
        return levy_area_poly(coeffs, n)
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def exact_mse(method: str, n: int) -> float:
    """Exact per-entry mean-squared error of the level-n truncation.

    Off-diagonal entries are exchangeable, so one number covers them all:
    the inverse-square tail from n over 2 pi^2 for the Fourier truncation,
    three times that for Kloeden-Platen-Wright, and 1/(8n + 4) for the
    polynomial truncation (the level-0 value 1/4 is the second moment of
    the Levy area itself).
    """
    if method == METHOD_FOURIER:
        if n < 1:
            raise ValueError("fourier truncation level must be positive")
        return inverse_square_tail(n) / (2.0 * _PI_SQ)
    if method == METHOD_KPW:
        if n < 1:
            raise ValueError("kpw truncation level must be positive")
        return 3.0 * (inverse_square_tail(n) / (2.0 * _PI_SQ))
    if method == METHOD_POLY:
        if n < 0:
            raise ValueError("poly truncation level must be non-negative")
        return 1.0 / (8 * n + 4)
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def asymptotic_constant(method: str) -> float:
    """Limit of budget * mse along the truncation family.

    With N the Gaussian-vector budget (see gaussian_budget), N * exact_mse
    of the truncation fitting that budget converges to 1/pi^2, 3/pi^2 and
    1/8 respectively.
    """
    if method == METHOD_FOURIER:
        return 1.0 / _PI_SQ
    if method == METHOD_KPW:
        return 3.0 / _PI_SQ
    if method == METHOD_POLY:
        return 0.125
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def gaussian_budget(method: str, n: int) -> int:
    """Gaussian-vector budget of the level-n truncation.

    Fourier-family truncations consume two coefficient vectors per index,
    so level n costs 2n; the polynomial truncation consumes one per index,
    so level n costs n.  This is the comparison variable for the
    asymptotic-rate statements.
    """
    if method in (METHOD_FOURIER, METHOD_KPW):
        if n < 1:
            raise ValueError("truncation level must be positive")
        return 2 * n
    if method == METHOD_POLY:
        if n < 0:
            raise ValueError("truncation level must be non-negative")
        return n
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def level_for_budget(method: str, budget: int) -> int:
    """Truncation level whose Gaussian budget equals the given one."""
    if method in (METHOD_FOURIER, METHOD_KPW):
        if budget < 2 or budget % 2:
            raise ValueError("fourier-family budgets must be positive even integers")
        return budget // 2
    if method == METHOD_POLY:
        if budget < 0:
            raise ValueError("budget must be non-negative")
        return budget
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def coupled_entry_diff_batch(
    method: str,
    seed: int,
    stream_ids: np.ndarray,
    n: int,
    n_ref: int,
    d: int,
    i: int = 0,
    j: int = 1,
) -> np.ndarray:
    """(i, j) entry of the level-n_ref minus level-n truncation difference.

    Evaluates both truncations from the same coefficient draw and returns
    their difference; terms shared by the two levels cancel algebraically
    and are never generated, which leaves only the index range [n, n_ref).
    One value per stream id.
    """
    if not 0 <= i < d or not 0 <= j < d or i == j:
        raise ValueError("need distinct component indices below d")
    if n_ref < n:
        raise ValueError("reference level must not be below the coarse level")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    if method in (METHOD_FOURIER, METHOD_KPW):
        if n < 1:
            raise ValueError("fourier-family levels must be positive")
        a, b = fourier_ab_block(seed, ids, n, n_ref, d)
        k = np.arange(n, n_ref, dtype=np.float64)
        pair = a[:, :, i] * b[:, :, j] - b[:, :, i] * a[:, :, j]
        diff = math.pi * np.sum(k * pair, axis=1)
        if method == METHOD_KPW:
            w1 = increment_block(seed, ids, d)
            a_sum_i = np.sum(a[:, :, i], axis=1)
            a_sum_j = np.sum(a[:, :, j], axis=1)
            diff = diff - (a_sum_i * w1[:, j] - w1[:, i] * a_sum_j)
        return diff
    if method == METHOD_POLY:
        if n < 0:
            raise ValueError("poly level must be non-negative")
        if n_ref == n:
            return np.zeros(ids.size)
        lo = max(n, 1)
        c = poly_coeff_block(seed, ids, lo, n_ref + 1, d)
        pair = c[:, :-1, i] * c[:, 1:, j] - c[:, 1:, i] * c[:, :-1, j]
        diff = 0.5 * np.sum(pair, axis=1)
        if n == 0:
            w1 = increment_block(seed, ids, d)
            diff = diff + 0.5 * (w1[:, i] * c[:, 0, j] - c[:, 0, i] * w1[:, j])
        return diff
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def _pair_index(i: int, j: int, d: int) -> int:
    # row-major position of (i, j), i < j, in the strict upper triangle
    return i * d - i * (i + 1) // 2 + (j - i - 1)


def _slot_width(d: int) -> int:
    return 2 * d + d * (d - 1) // 2


def _lam_std_davie() -> float:
    return math.sqrt(1.0 / 12.0)


def cheap_levy_area(stream: RngStream, d: int, variant: str) -> tuple[AntisymMatrix, np.ndarray, np.ndarray]:
    """Covariance-matched one-term Levy-area sample.

    Draws the increment and the first polynomial coefficient, then fills
    the discarded tail with an independent antisymmetric Gaussian matrix:
    entry variance 1/12 for the "davie" variant, or conditionally on the
    first coefficient for the "foster" variant (same unconditional law).
    Returns (area, increment, first coefficient).
    """
    if d < 2:
        raise ValueError("need dimension d >= 2")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    raw = stream.normals(_slot_width(d))
    w1 = raw[:d].copy()
    c1 = raw[d : 2 * d] / _SQRT3
    upper = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            xi = raw[2 * d + _pair_index(i, j, d)]
            if variant == VARIANT_DAVIE:
                lam = _lam_std_davie() * xi
            else:
                lam = math.sqrt(0.05 + 0.05 * (c1[i] * c1[i] + c1[j] * c1[j])) * xi
            upper[i, j] = 0.5 * (w1[i] * c1[j] - c1[i] * w1[j]) + lam
    return _antisymmetrize(upper), w1, c1


def stitched_levy_area(stream: RngStream, d: int, n_sub: int, variant: str) -> AntisymMatrix:
    """Whole-interval Levy area from rescaled cheap samples on subintervals.

    Each of the n_sub subintervals contributes a cheap area scaled to its
    length plus the chord wedge between the accumulated increment and the
    subinterval increment (the additivity relation for Levy area).  With
    n_sub = 1 this reduces exactly to cheap_levy_area.
    """
    if d < 2:
        raise ValueError("need dimension d >= 2")
    if n_sub < 1:
        raise ValueError("need at least one subinterval")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    h = 1.0 / n_sub
    sqrt_h = math.sqrt(h)
    width = _slot_width(d)
    raw = stream.normals(width * n_sub)
    upper = np.zeros((d, d))
    w_pre = np.zeros(d)
    for slot in range(n_sub):
        chunk = raw[slot * width : (slot + 1) * width]
        w_u = chunk[:d]
        c_u = chunk[d : 2 * d] / _SQRT3
        dw = sqrt_h * w_u
        for i in range(d):
            for j in range(i + 1, d):
                xi = chunk[2 * d + _pair_index(i, j, d)]
                if variant == VARIANT_DAVIE:
                    lam = _lam_std_davie() * xi
                else:
                    lam = math.sqrt(0.05 + 0.05 * (c_u[i] * c_u[i] + c_u[j] * c_u[j])) * xi
                area = h * (0.5 * (w_u[i] * c_u[j] - c_u[i] * w_u[j]) + lam)
                chord = 0.5 * (w_pre[i] * dw[j] - w_pre[j] * dw[i])
                upper[i, j] += area + chord
        w_pre = w_pre + dw
    return _antisymmetrize(upper)


def cheap_entry_batch(
    seed: int, stream_ids: np.ndarray, d: int, variant: str, i: int = 0, j: int = 1
) -> np.ndarray:
    """(i, j) entry of cheap_levy_area for many streams at once."""
    if d < 2 or not 0 <= i < j < d:
        raise ValueError("need 0 <= i < j < d and d >= 2")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    raw = normals_batch(seed, ids, 0, _slot_width(d))
    w1 = raw[:, :d]
    c1 = raw[:, d : 2 * d] / _SQRT3
    xi = raw[:, 2 * d + _pair_index(i, j, d)]
    if variant == VARIANT_DAVIE:
        lam = _lam_std_davie() * xi
    else:
        lam = np.sqrt(0.05 + 0.05 * (c1[:, i] * c1[:, i] + c1[:, j] * c1[:, j])) * xi
    return 0.5 * (w1[:, i] * c1[:, j] - c1[:, i] * w1[:, j]) + lam


def stitched_entry_batch(
    seed: int,
    stream_ids: np.ndarray,
    d: int,
    n_sub: int,
    variant: str,
    i: int = 0,
    j: int = 1,
) -> np.ndarray:
    """(i, j) entry of stitched_levy_area for many streams at once."""
    if d < 2 or not 0 <= i < j < d:
        raise ValueError("need 0 <= i < j < d and d >= 2")
    if n_sub < 1:
        raise ValueError("need at least one subinterval")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    h = 1.0 / n_sub
    sqrt_h = math.sqrt(h)
    width = _slot_width(d)
    raw = normals_batch(seed, ids, 0, width * n_sub)
    total = np.zeros(ids.size)
    w_pre_i = np.zeros(ids.size)
    w_pre_j = np.zeros(ids.size)
    for slot in range(n_sub):
        chunk = raw[:, slot * width : (slot + 1) * width]
        w_u = chunk[:, :d]
        c_u = chunk[:, d : 2 * d] / _SQRT3
        dw_i = sqrt_h * w_u[:, i]
        dw_j = sqrt_h * w_u[:, j]
        xi = chunk[:, 2 * d + _pair_index(i, j, d)]
        if variant == VARIANT_DAVIE:
            lam = _lam_std_davie() * xi
        else:
            lam = np.sqrt(0.05 + 0.05 * (c_u[:, i] * c_u[:, i] + c_u[:, j] * c_u[:, j])) * xi
        area = h * (0.5 * (w_u[:, i] * c_u[:, j] - c_u[:, i] * w_u[:, j]) + lam)
        chord = 0.5 * (w_pre_i * dw_j - w_pre_j * dw_i)
        total += area + chord
        w_pre_i = w_pre_i + dw_i
        w_pre_j = w_pre_j + dw_j
    return total
