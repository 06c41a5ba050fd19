"""Deterministic parallel Monte Carlo estimation and log-log rate fitting.

Sample i of any estimator draws from stream id (stream_offset + i), so the
set of random numbers is fixed by the seed alone.  Samples are processed in
fixed-size chunks aligned to stream ids, each chunk reduces to a running
(mean, squared-deviation, count) triple, and the chunk triples are combined
along a fixed pairwise tree.  Threads only decide which worker evaluates
which chunk; the chunking and the merge tree never change, so results are
bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bridge_expansions import CovGrid, fluctuation_scale, fluctuation_transform
from .gaussian_core import KINDS, normals_batch
from .levy_area import METHOD_POLY, METHODS, coupled_entry_diff_batch, exact_mse

DEFAULT_CHUNK = 1 << 14


@dataclass(frozen=True)
class MCEstimate:
    """Running mean / squared-deviation / count for one estimated scalar."""

    mean: float
    m2: float
    n_samples: int

    @property
    def stderr(self) -> float:
        if self.n_samples < 2:
            raise ValueError("standard error needs at least two samples")
        return math.sqrt(self.m2 / (self.n_samples * (self.n_samples - 1)))

    @classmethod
    def from_values(cls, values: np.ndarray) -> "MCEstimate":
        x = np.asarray(values, dtype=np.float64)
        mean = float(np.mean(x))
        m2 = float(np.sum((x - mean) ** 2))
        return cls(mean=mean, m2=m2, n_samples=x.size)

    def merge(self, other: "MCEstimate") -> "MCEstimate":
        """Combine two disjoint-sample estimates (exact in expectation).

        The combination is the standard parallel variance update; it is
        associative up to floating-point rounding, and the harness always
        applies it along the same tree.
        """
        n1, n2 = self.n_samples, other.n_samples
        n = n1 + n2
        delta = other.mean - self.mean
        mean = self.mean + delta * (n2 / n)
        m2 = self.m2 + other.m2 + delta * delta * (n1 * (n2 / n))
        return MCEstimate(mean=mean, m2=m2, n_samples=n)


def _pairwise_merge(parts: Sequence):
    if not parts:
        raise ValueError("nothing to merge")
    layer = list(parts)
    while len(layer) > 1:
        nxt = []
        for a, b in zip(layer[0::2], layer[1::2]):
            nxt.append(a.merge(b))
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def _chunk_ranges(n_samples: int, chunk: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n_samples)) for lo in range(0, n_samples, chunk)]


def _map_ordered(worker: Callable, ranges: Sequence[tuple[int, int]], threads: int) -> list:
    if threads <= 1 or len(ranges) <= 1:
        return [worker(r) for r in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, ranges))


def coupled_mse_exact(method: str, n: int, n_ref: int) -> float:
    """Analytic value of E[(level-n_ref area - level-n area)^2] per entry.

    Equals exact_mse(n) - exact_mse(n_ref) because the truncation
    increments over disjoint index blocks are uncorrelated.
    """
    return exact_mse(method, n) - exact_mse(method, n_ref)


def estimate_mse(
    method: str,
    n: int,
    n_ref: int,
    d: int,
    n_samples: int,
    seed: int,
    stream_offset: int = 0,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> MCEstimate:
    """Monte Carlo estimate of the coupled truncation error.

    Each sample draws one coefficient set at the reference level, evaluates
    the (1, 2) entry of the truncation at both levels and accumulates the
    squared difference; terms shared by the two levels cancel algebraically
    and are skipped, which the counter-based streams make value-identical
    to materialising the full set.  The mean estimates
    exact_mse(method, n) - exact_mse(method, n_ref).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if d < 2:
        raise ValueError("Levy area needs dimension d >= 2")
    min_n = 0 if method == METHOD_POLY else 1
    if n < min_n:
        raise ValueError(f"level must be >= {min_n} for {method}")
    if n_ref <= n:
        raise ValueError("reference level must exceed the estimated level")
    if n_samples < 2:
        raise ValueError("need at least two samples")

    def worker(rng: tuple[int, int]) -> MCEstimate:
        lo, hi = rng
        ids = stream_offset + np.arange(lo, hi, dtype=np.uint64)
        diff = coupled_entry_diff_batch(method, seed, ids, n, n_ref, d)
        return MCEstimate.from_values(diff * diff)

    parts = _map_ordered(worker, _chunk_ranges(n_samples, chunk_size), threads)
    return _pairwise_merge(parts)


@dataclass(frozen=True)
class _ArrayStats:
    """Welford triple with array-valued mean/m2, merged like MCEstimate."""

    mean: np.ndarray
    m2: np.ndarray
    n_samples: int

    @classmethod
    def from_values(cls, values: np.ndarray) -> "_ArrayStats":
        mean = values.mean(axis=0)
        m2 = ((values - mean) ** 2).sum(axis=0)
        return cls(mean=mean, m2=m2, n_samples=values.shape[0])

    def merge(self, other: "_ArrayStats") -> "_ArrayStats":
        n1, n2 = self.n_samples, other.n_samples
        n = n1 + n2
        delta = other.mean - self.mean
        mean = self.mean + delta * (n2 / n)
        m2 = self.m2 + other.m2 + delta * delta * (n1 * (n2 / n))
        return _ArrayStats(mean=mean, m2=m2, n_samples=n)

    def stderr(self) -> np.ndarray:
        return np.sqrt(self.m2 / (self.n_samples * (self.n_samples - 1)))


def estimate_fluct_cov(
    kind: str,
    n_terms: int,
    grid,
    n_samples: int,
    seed: int,
    stream_offset: int = 0,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> CovGrid:
    """Empirical covariance of the scaled truncation residual at grid points.

    Samples the joint law of (bridge, coefficients) exactly through one
    linear map per sample and averages outer products of the scaled
    residual vector.  Entries carry their own standard errors.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown expansion kind {kind!r}")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    ts = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    transform = fluctuation_transform(kind, n_terms, ts)
    dim = transform.shape[1]
    m = ts.size
    # keep per-chunk product tensors bounded in memory
    chunk = max(64, min(chunk_size, (1 << 22) // max(1, m * m)))

    def worker(rng: tuple[int, int]) -> _ArrayStats:
        lo, hi = rng
        ids = stream_offset + np.arange(lo, hi, dtype=np.uint64)
        z = normals_batch(seed, ids, 0, dim)
        f = z @ transform.T
        prods = f[:, :, None] * f[:, None, :]
        return _ArrayStats.from_values(prods)

    parts = _map_ordered(worker, _chunk_ranges(n_samples, chunk), threads)
    stats = _pairwise_merge(parts)
    return CovGrid(
        kind=kind,
        variant="empirical",
        level=n_terms,
        s=ts,
        t=ts,
        values=stats.mean,
        scale=fluctuation_scale(kind, n_terms),
        stderr=stats.stderr(),
        n_samples=n_samples,
    )


@dataclass(frozen=True)
class RateFit:
    """Slope and constant of a mean-squared-error decay law.

    slope comes from the unconstrained least squares of log(mse) on
    log(N); log_constant is the least-squares constant under the declared
    unit-rate model mse = C / N, i.e. the average of log(N * mse).  The
    residual norm refers to the unconstrained line.
    """

    slope: float
    log_constant: float
    residual_norm: float

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


def fit_rate(points: Sequence[tuple[float, float]]) -> RateFit:
    """Fit a power law through (N, mse) pairs on log-log axes."""
    pts = [(float(n), float(m)) for n, m in points]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if any(n <= 0 or m <= 0 for n, m in pts):
        raise ValueError("points must be strictly positive")
    log_n = np.array([math.log(n) for n, _ in pts])
    log_m = np.array([math.log(m) for _, m in pts])
    design = np.vstack([log_n, np.ones_like(log_n)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, log_m, rcond=None)
    resid = log_m - (slope * log_n + intercept)
    log_constant = float(np.mean(log_m + log_n))
    return RateFit(
        slope=float(slope),
        log_constant=log_constant,
        residual_norm=float(np.linalg.norm(resid)),
    )


def stderr_coverage(
    method: str,
    n: int,
    n_ref: int,
    d: int,
    n_samples: int,
    n_seeds: int,
    base_seed: int = 0,
    width: float = 2.0,
) -> int:
    """How many of n_seeds independent runs cover the analytic value.

    Coverage means |estimate - analytic| <= width * stderr; used as a weak
    calibration check of the reported standard errors.
    """
    target = coupled_mse_exact(method, n, n_ref)
    hits = 0
    for s in range(n_seeds):
        est = estimate_mse(method, n, n_ref, d, n_samples, seed=base_seed + s)
        if abs(est.mean - target) <= width * est.stderr:
            hits += 1
    return hits
