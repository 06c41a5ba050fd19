"""Compensated summation helpers used by the series evaluations."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np


def kahan_sum(values: Iterable[float]) -> float:
    """Sum floats with Neumaier's compensated algorithm.

    Accumulation error stays O(eps) independent of the number of terms,
    which matters when a large partial sum is later cancelled against an
    analytic constant of similar size.
    """
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def compensated_series_sum(
    term_chunk: Callable[[np.ndarray], np.ndarray],
    start: int,
    stop: int,
    chunk: int = 1 << 20,
) -> float:
    """Sum term_chunk(k) for integer k in [start, stop) in numpy chunks.

    Each chunk is reduced with numpy's pairwise summation and the chunk
    partials are combined with Neumaier compensation, so the result is
    compensated end to end while staying vectorised.
    """
    if stop <= start:
        return 0.0
    total = 0.0
    comp = 0.0
    for lo in range(start, stop, chunk):
        hi = min(lo + chunk, stop)
        part = float(np.sum(term_chunk(np.arange(lo, hi, dtype=np.float64))))
        t = total + part
        if abs(total) >= abs(part):
            comp += (total - t) + part
        else:
            comp += (part - t) + total
        total = t
    return total + comp
