"""Sine-square moments, Bernoulli numbers and zeta values at even integers.

The moment sequence here is e(k, n) = int_0^1 2 sin(k pi t)^2 t^n dt.  Its
two-step recurrence in n, combined with the weighted moment identity

    sum_k e(k, n) / (k^2 pi^2) = 1 / ((n + 2)(n + 3)),

pins down zeta at every even positive integer once the sums are matched
against the recurrence that uniquely characterises the even-indexed
Bernoulli numbers.  Bernoulli numbers are kept as exact rationals because
their defining recurrence is catastrophically ill-conditioned in floating
point beyond roughly index 20.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .summation import compensated_series_sum, kahan_sum

PI_SQ = math.pi * math.pi


def sine_square_moment(k: int, n: int) -> float:
    """Moment e(k, n) via the two-step recurrence in n.

    e(k, 0) = 1 and e(k, 1) = 1/2 for every k, then
    e(k, n) = 1/(n + 1) - n(n - 1) / (4 k^2 pi^2) * e(k, n - 2).
    """
    if k < 1:
        raise ValueError("frequency index k must be positive")
    if n < 0:
        raise ValueError("moment degree n must be non-negative")
    if n == 0:
        return 1.0
    if n == 1:
        return 0.5
    val = 1.0 if n % 2 == 0 else 0.5
    scale = 0.25 / (k * k * PI_SQ)
    for m in range(2 + (n % 2), n + 1, 2):
        val = 1.0 / (m + 1) - m * (m - 1) * scale * val
    return val


def sine_square_moment_closed(k: int, n: int) -> float:
    """Closed-form alternating-sum expression for e(k, n).

    Independent of the recurrence path, so the two serve as mutual
    cross-checks.
    """
    if k < 1:
        raise ValueError("frequency index k must be positive")
    if n < 0:
        raise ValueError("moment degree n must be non-negative")
    # even and odd degrees share the shape 1/(n+1) + sum_j (-1)^j n! /
    # ((n - 2j + 1)! 4^j (k pi)^(2j)) once the two published cases are
    # rewritten in terms of n itself
    terms = []
    for j in range(1, n // 2 + 1):
        coeff = Fraction(math.factorial(n), math.factorial(n - 2 * j + 1) * 4**j)
        terms.append((-1) ** j * float(coeff) * (k * math.pi) ** (-2 * j))
    return 1.0 / (n + 1) + math.fsum(terms)


@dataclass(frozen=True)
class MomentTable:
    """Moments e(k, n) for 1 <= k <= max_k, 0 <= n <= max_n."""

    max_k: int
    max_n: int
    values: np.ndarray  # shape (max_k, max_n + 1), row k-1 holds e(k, .)

    def value(self, k: int, n: int) -> float:
        return float(self.values[k - 1, n])


def sine_square_moment_table(max_k: int, max_n: int) -> MomentTable:
    """Vectorised moment table, recurring over n for all k at once."""
    if max_k < 1 or max_n < 0:
        raise ValueError("need max_k >= 1 and max_n >= 0")
    k = np.arange(1, max_k + 1, dtype=np.float64)
    scale = 0.25 / (k * k * PI_SQ)
    vals = np.empty((max_k, max_n + 1))
    vals[:, 0] = 1.0
    if max_n >= 1:
        vals[:, 1] = 0.5
    for n in range(2, max_n + 1):
        vals[:, n] = 1.0 / (n + 1) - n * (n - 1) * scale * vals[:, n - 2]
    return MomentTable(max_k=max_k, max_n=max_n, values=vals)


@dataclass(frozen=True)
class BernoulliTable:
    """Bernoulli numbers B_1..B_max as exact rationals."""

    values: tuple[Fraction, ...]

    @property
    def max_index(self) -> int:
        return len(self.values)

    def rational(self, m: int) -> Fraction:
        if not 1 <= m <= len(self.values):
            raise ValueError(f"index {m} outside tabulated range 1..{len(self.values)}")
        return self.values[m - 1]

    def real(self, m: int) -> float:
        return float(self.rational(m))


def bernoulli_numbers(max_m: int) -> BernoulliTable:
    """Bernoulli numbers from their defining recurrence, in exact arithmetic.

    Solves 1 + sum_{n=1}^{m} C(m+1, n) B_n = 0 for B_m successively, so the
    residual of the recurrence is exactly zero by construction.
    """
    if max_m < 1:
        raise ValueError("need max_m >= 1")
    values: list[Fraction] = []
    for m in range(1, max_m + 1):
        acc = Fraction(1)
        for n in range(1, m):
            acc += math.comb(m + 1, n) * values[n - 1]
        values.append(Fraction(-acc, m + 1))
    return BernoulliTable(values=tuple(values))


_BERNOULLI_CACHE: dict[int, BernoulliTable] = {}


def _bernoulli_cached(max_m: int) -> BernoulliTable:
    # grow-only cache keyed by a rounded-up size to avoid recomputation
    size = max(64, max_m)
    for have in _BERNOULLI_CACHE:
        if have >= size:
            return _BERNOULLI_CACHE[have]
    table = bernoulli_numbers(size)
    _BERNOULLI_CACHE.clear()
    _BERNOULLI_CACHE[size] = table
    return table


def zeta_even(n: int) -> float:
    """zeta(2n) for positive integer n.

    The rational prefactor (-1)^(n+1) 2^(2n) B_{2n} / (2 (2n)!) is carried
    exactly, multiplied by the double power pi^(2n) in exact rational
    arithmetic and rounded once at the end, so the result is the correctly
    rounded product; in particular zeta(2) reproduces pi^2 / 6 bit for bit.
    """
    if n < 1:
        raise ValueError("zeta_even is defined for positive integer n")
    b = _bernoulli_cached(2 * n).rational(2 * n)
    rational = (-1) ** (n + 1) * b * Fraction(4**n, 2 * math.factorial(2 * n))
    return float(rational * Fraction(math.pi ** (2 * n)))


@functools.lru_cache(maxsize=4096)
def inverse_square_tail(n: int) -> float:
    """Tail sum of 1/k^2 from k = n onwards.

    Evaluated as zeta(2) minus the compensated partial sum, which keeps
    full precision and deliberately routes through the Bernoulli-based
    zeta value.  Large partial sums switch to chunked compensated
    summation so million-term tails stay cheap.
    """
    if n < 1:
        raise ValueError("tail index must be positive")
    if n <= 200_000:
        partial = kahan_sum(1.0 / (k * k) for k in range(1, n))
    else:
        partial = compensated_series_sum(lambda k: 1.0 / (k * k), 1, n)
    return zeta_even(1) - partial


def moment_identity_residual(n: int, terms: int) -> float:
    """Defect of the truncated weighted moment identity.

    Returns |sum_{k=1}^{terms} e(k, n) / (k^2 pi^2) - 1/((n+2)(n+3))|,
    which is exactly the discarded positive tail and must shrink as the
    number of terms grows.
    """
    if n < 0:
        raise ValueError("moment degree n must be non-negative")
    if terms < 1:
        raise ValueError("need at least one term")
    k = np.arange(1, terms + 1, dtype=np.float64)
    scale = 0.25 / (k * k * PI_SQ)
    if n % 2 == 0:
        e = np.ones_like(k)
        start = 2
    else:
        e = np.full_like(k, 0.5)
        start = 3
    for m in range(start, n + 1, 2):
        e = 1.0 / (m + 1) - m * (m - 1) * scale * e
    weighted = e / (k * k * PI_SQ)
    return abs(float(np.sum(weighted)) - 1.0 / ((n + 2) * (n + 3)))
