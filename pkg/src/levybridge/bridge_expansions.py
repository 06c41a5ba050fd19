"""Truncated series of the Brownian bridge and their residual covariances.

Three expansions of the standard bridge on [0, 1] are supported: the sine
eigenfunction (Karhunen-Loeve) series, the full Fourier series with its
correlated constant coefficient, and the shifted-Legendre polynomial series.
For each one this module evaluates truncated sample paths, the exact finite
truncation-residual covariance (scaled by the natural rate: N for the sine
and polynomial series, 2N for the Fourier series since one more index adds
two Gaussians), the pointwise limits of those scaled covariances, and the
linear map that turns i.i.d. normals into exact-in-law samples of the scaled
residual at a grid, which is what the Monte Carlo harness draws from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gaussian_core import KIND_FOURIER, KIND_KL, KIND_POLY, KINDS, CoefficientSet
from .legendre import antiderivative_all, gauss_legendre_rule
from .summation import compensated_series_sum
from .zeta_moments import inverse_square_tail

_PI_SQ = math.pi * math.pi


def _check_time(value: float, name: str = "t") -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return v


def bridge_cov(s: float, t: float) -> float:
    """Covariance min(s, t) - s t of the standard Brownian bridge."""
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    return min(s, t) - s * t


def kl_residual_cov(n_terms: int, s: float, t: float) -> float:
    """Residual covariance of the sine-series truncation (unscaled).

    bridge_cov minus the first n_terms of its eigenfunction representation,
    summed with compensated arithmetic; multiply by n_terms for the scaled
    fluctuation covariance.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    k = np.arange(1, n_terms + 1, dtype=np.float64)
    terms = -2.0 * np.sin(k * math.pi * s) * np.sin(k * math.pi * t) / (k * k * _PI_SQ)
    return math.fsum([min(s, t) - s * t] + terms.tolist())


def kl_residual_cov_tail(n_terms: int, s: float, t: float, cutoff: int) -> float:
    """Tail form of kl_residual_cov, summing indices n_terms+1 .. cutoff.

    Serves as an independent oracle for the closed form; the discarded
    remainder beyond the cutoff is oscillatory off the diagonal and is
    added back analytically on the diagonal where all terms align.
    """
    if cutoff <= n_terms:
        raise ValueError("cutoff must exceed n_terms")
    s = _check_time(s, "s")
    t = _check_time(t, "t")

    def chunk(k: np.ndarray) -> np.ndarray:
        return 2.0 * np.sin(k * math.pi * s) * np.sin(k * math.pi * t) / (k * k * _PI_SQ)

    total = compensated_series_sum(chunk, n_terms + 1, cutoff + 1)
    if s == t and 0.0 < t < 1.0:
        # on the interior diagonal 2 sin^2 averages to 1, so the remainder
        # past the cutoff is the inverse-square tail up to oscillatory terms
        total += inverse_square_tail(cutoff + 1) / _PI_SQ
    return total


def fourier_residual_cov(n_terms: int, s: float, t: float) -> float:
    """Residual covariance of the Fourier truncation (unscaled closed form).

    Multiply by 2 * n_terms for the scaled fluctuation covariance.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    k = np.arange(1, n_terms + 1, dtype=np.float64)
    terms = -np.cos(2.0 * k * math.pi * (t - s)) / (2.0 * k * k * _PI_SQ)
    head = (
        min(s, t)
        - s * t
        + (s * s - s) / 2.0
        + (t * t - t) / 2.0
        + 1.0 / 12.0
    )
    return math.fsum([head] + terms.tolist())


def fourier_residual_cov_tail(n_terms: int, s: float, t: float, cutoff: int) -> float:
    """Tail representation of the Fourier residual covariance.

    Sums cos(2 k pi (t - s)) / (2 k^2 pi^2) for k in (n_terms, cutoff] with
    compensated accumulation.  When t - s is an integer every cosine equals
    one, so the remainder past the cutoff is half the inverse-square tail
    and is restored exactly; otherwise the remainder is an oscillatory
    O(cutoff^-2) quantity and is left out.
    """
    if cutoff <= n_terms:
        raise ValueError("cutoff must exceed n_terms")
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    delta = t - s

    def chunk(k: np.ndarray) -> np.ndarray:
        return np.cos(2.0 * k * math.pi * delta) / (2.0 * k * k * _PI_SQ)

    total = compensated_series_sum(chunk, n_terms + 1, cutoff + 1)
    if delta == round(delta):
        total += inverse_square_tail(cutoff + 1) / (2.0 * _PI_SQ)
    return total


def poly_residual_cov(n_terms: int, s: float, t: float) -> float:
    """Residual covariance of the polynomial truncation (unscaled).

    The level-n truncation keeps polynomial degrees 1 .. n_terms - 1, so
    level 1 leaves the bare bridge covariance.  Multiply by n_terms for
    the scaled fluctuation covariance.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    if n_terms == 1:
        return min(s, t) - s * t
    anti = antiderivative_all(n_terms - 1, np.array([s, t]))
    k = np.arange(1, n_terms, dtype=np.float64)
    terms = -(2.0 * k + 1.0) * anti[:, 0] * anti[:, 1]
    return math.fsum([min(s, t) - s * t] + terms.tolist())


def fluctuation_scale(kind: str, n_terms: int) -> float:
    """Variance scaling of the fluctuation process at truncation level n."""
    if kind not in KINDS:
        raise ValueError(f"unknown expansion kind {kind!r}")
    return 2.0 * n_terms if kind == KIND_FOURIER else float(n_terms)


def scaled_residual_cov(kind: str, n_terms: int, s: float, t: float) -> float:
    """Fluctuation covariance at (s, t): scale times the residual covariance."""
    if kind == KIND_KL:
        return n_terms * kl_residual_cov(n_terms, s, t)
    if kind == KIND_FOURIER:
        return 2.0 * n_terms * fourier_residual_cov(n_terms, s, t)
    if kind == KIND_POLY:
        return n_terms * poly_residual_cov(n_terms, s, t)
    raise ValueError(f"unknown expansion kind {kind!r}")


def limit_fluctuation_cov(kind: str, s: float, t: float) -> float:
    """Pointwise limit of the scaled residual covariance.

    The endpoint conditions are genuine discontinuities of the limit, so
    membership of {0, 1} is tested with exact floating-point equality
    rather than a tolerance.
    """
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    if kind == KIND_KL:
        return 1.0 / _PI_SQ if s == t and 0.0 < t < 1.0 else 0.0
    if kind == KIND_FOURIER:
        if s == t or (s in (0.0, 1.0) and t in (0.0, 1.0)):
            return 1.0 / _PI_SQ
        return 0.0
    if kind == KIND_POLY:
        return math.sqrt(t * (1.0 - t)) / math.pi if s == t else 0.0
    raise ValueError(f"unknown expansion kind {kind!r}")


def bridge_integral_cov(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    quad_nodes: int = 128,
) -> float:
    """Covariance of two Wiener integrals against the bridge, by quadrature.

    Evaluates int_0^1 f g dt - (int_0^1 f dt)(int_0^1 g dt) with composite
    Gauss-Legendre panels (16 nodes each), which is the covariance of the
    corresponding bridge integrals.
    """
    if quad_nodes < 16:
        raise ValueError("need at least 16 quadrature nodes")
    per_panel = 16
    n_panels = quad_nodes // per_panel
    fg = 0.0
    f1 = 0.0
    g1 = 0.0
    for p in range(n_panels):
        a = p / n_panels
        b = (p + 1) / n_panels
        x, w = gauss_legendre_rule(per_panel, a, b)
        fx = np.asarray(f(x), dtype=np.float64)
        gx = np.asarray(g(x), dtype=np.float64)
        fg += float(np.sum(w * fx * gx))
        f1 += float(np.sum(w * fx))
        g1 += float(np.sum(w * gx))
    return fg - f1 * g1


@dataclass(frozen=True)
class TruncatedBridgePath:
    """One truncated-bridge sample evaluated on a grid; values is (m, d)."""

    kind: str
    order: int
    ts: np.ndarray
    values: np.ndarray


def _basis_matrix(kind: str, order: int, ts: np.ndarray) -> np.ndarray:
    """Series basis evaluated on the grid, shape (len(ts), n_basis).

    For the Fourier kind the first column belongs to the constant
    coefficient (weight 1/2), followed by the cosine then sine columns.
    """
    k = np.arange(1, order + 1, dtype=np.float64)
    if kind == KIND_KL:
        return 2.0 * np.sin(np.outer(ts, k * math.pi)) / (k * math.pi)
    if kind == KIND_FOURIER:
        ang = 2.0 * math.pi * np.outer(ts, k)
        const = np.full((ts.size, 1), 0.5)
        return np.hstack([const, np.cos(ang), np.sin(ang)])
    if kind == KIND_POLY:
        anti = antiderivative_all(order, ts)
        return ((2.0 * k + 1.0)[:, None] * anti).T
    raise ValueError(f"unknown expansion kind {kind!r}")


def truncated_bridge_path(coeffs: CoefficientSet, ts) -> TruncatedBridgePath:
    """Evaluate the truncated expansion held by coeffs on a grid in [0, 1]."""
    grid = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise ValueError("evaluation grid must lie in [0, 1]")
    basis = _basis_matrix(coeffs.kind, coeffs.order, grid)
    if coeffs.kind == KIND_KL:
        values = basis @ coeffs.z
    elif coeffs.kind == KIND_FOURIER:
        stacked = np.vstack([coeffs.a0[None, :], coeffs.a, coeffs.b])
        values = basis @ stacked
    else:
        values = basis @ coeffs.c
    return TruncatedBridgePath(kind=coeffs.kind, order=coeffs.order, ts=grid, values=values)


def truncated_bridge_value(coeffs: CoefficientSet, t: float) -> np.ndarray:
    """Partial sum of the expansion at a single time, as a d-vector."""
    return truncated_bridge_path(coeffs, [_check_time(t)]).values[0]


@dataclass(frozen=True)
class CovGrid:
    """Scaled covariance values over an (s, t) grid with provenance."""

    kind: str
    variant: str  # "analytic", "empirical" or "limit"
    level: int | None
    s: np.ndarray
    t: np.ndarray
    values: np.ndarray
    scale: float
    stderr: np.ndarray | None = None
    n_samples: int | None = None


def default_grid(count: int = 101) -> np.ndarray:
    """Uniform grid on [0, 1] including both endpoints."""
    if count < 2:
        raise ValueError("grid needs at least the two endpoints")
    return np.linspace(0.0, 1.0, count)


def residual_cov_grid(kind: str, n_terms: int, s_grid, t_grid=None) -> CovGrid:
    """Analytic scaled residual covariance on a grid."""
    s = np.atleast_1d(np.asarray(s_grid, dtype=np.float64))
    t = s if t_grid is None else np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    values = np.empty((s.size, t.size))
    for i, si in enumerate(s):
        for j, tj in enumerate(t):
            values[i, j] = scaled_residual_cov(kind, n_terms, si, tj)
    return CovGrid(
        kind=kind,
        variant="analytic",
        level=n_terms,
        s=s,
        t=t,
        values=values,
        scale=fluctuation_scale(kind, n_terms),
    )


def limit_cov_grid(kind: str, s_grid, t_grid=None) -> CovGrid:
    """Pointwise limit covariance on a grid."""
    s = np.atleast_1d(np.asarray(s_grid, dtype=np.float64))
    t = s if t_grid is None else np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    values = np.empty((s.size, t.size))
    for i, si in enumerate(s):
        for j, tj in enumerate(t):
            values[i, j] = limit_fluctuation_cov(kind, si, tj)
    return CovGrid(
        kind=kind, variant="limit", level=None, s=s, t=t, values=values, scale=1.0
    )


def _coefficient_count(kind: str, n_terms: int) -> int:
    if kind == KIND_KL:
        return n_terms
    if kind == KIND_FOURIER:
        return 2 * n_terms + 1
    if kind == KIND_POLY:
        return n_terms - 1
    raise ValueError(f"unknown expansion kind {kind!r}")


def fluctuation_transform(kind: str, n_terms: int, grid) -> np.ndarray:
    """Linear map from i.i.d. normals to the scaled residual at the grid.

    Assembles the joint Gaussian law of (bridge values at grid points,
    expansion coefficients) from the primitive covariances, factorises it,
    and composes with the residual projection bridge - basis @ coeffs.  For
    z a standard normal vector, transform @ z has exactly the law of the
    fluctuation process at the grid points; the number of normals consumed
    is the number of columns.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown expansion kind {kind!r}")
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    ts = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    if np.any(ts < 0.0) or np.any(ts > 1.0):
        raise ValueError("grid must lie in [0, 1]")
    m = ts.size
    ncoef = _coefficient_count(kind, n_terms)
    dim = m + ncoef
    cov = np.empty((dim, dim))
    cov[:m, :m] = np.minimum.outer(ts, ts) - np.outer(ts, ts)

    if kind == KIND_KL:
        k = np.arange(1, n_terms + 1, dtype=np.float64)
        cross = np.sin(np.outer(ts, k * math.pi)) / (k * math.pi)
        cc = np.diag(np.full(n_terms, 0.5))
        basis = _basis_matrix(kind, n_terms, ts)
    elif kind == KIND_FOURIER:
        k = np.arange(1, n_terms + 1, dtype=np.float64)
        ang = 2.0 * math.pi * np.outer(ts, k)
        cross_a0 = (ts - ts * ts)[:, None]
        cross_a = (np.cos(ang) - 1.0) / (2.0 * k * k * _PI_SQ)
        cross_b = np.sin(ang) / (2.0 * k * k * _PI_SQ)
        cross = np.hstack([cross_a0, cross_a, cross_b])
        cc = np.zeros((ncoef, ncoef))
        cc[0, 0] = 1.0 / 3.0
        var_ab = 1.0 / (2.0 * k * k * _PI_SQ)
        cc[np.arange(1, n_terms + 1), np.arange(1, n_terms + 1)] = var_ab
        cc[np.arange(n_terms + 1, ncoef), np.arange(n_terms + 1, ncoef)] = var_ab
        cc[0, 1 : n_terms + 1] = -1.0 / (k * k * _PI_SQ)
        cc[1 : n_terms + 1, 0] = -1.0 / (k * k * _PI_SQ)
        basis = _basis_matrix(kind, n_terms, ts)
    else:
        if ncoef == 0:
            cross = np.empty((m, 0))
            cc = np.empty((0, 0))
            basis = np.empty((m, 0))
        else:
            k = np.arange(1, n_terms, dtype=np.float64)
            anti = antiderivative_all(n_terms - 1, ts)
            cross = anti.T
            cc = np.diag(1.0 / (2.0 * k + 1.0))
            basis = ((2.0 * k + 1.0)[:, None] * anti).T

    cov[:m, m:] = cross
    cov[m:, :m] = cross.T
    cov[m:, m:] = cc
    root = np.linalg.cholesky(cov)
    projection = np.hstack([np.eye(m), -basis])
    return math.sqrt(fluctuation_scale(kind, n_terms)) * (projection @ root)
