"""Deterministic Gaussian streams and expansion-coefficient samplers.

Randomness comes from the Philox4x32-10 counter-based generator.  The 64-bit
seed forms the key, and the 128-bit counter carries (block index, stream id),
so every 4-word block is a pure function of (seed, stream_id, block).  Each
block is turned into two standard normals with the Box-Muller transform
(fixed consumption: positions 2b and 2b+1 come from block b), which makes
any position range of any stream generable independently of what else has
been drawn.  That random access is what the Monte Carlo harness relies on
for thread-count-independent results and for evaluating coupled truncations
without materialising full coefficient sets.

Coefficient layout within a stream (positions are in units of normals):

* kl / poly:  increment W1 at [0, d), coefficient k at [k*d, (k+1)*d)
* fourier:    W1 at [0, d), the residual normal for the constant coefficient
              at [d, 2d), then per k >= 1 the cosine coefficient at
              [2kd, 2kd+d) and the sine coefficient at [2kd+d, 2kd+2d)

The constant Fourier coefficient is not drawn directly: it is the exact
regression onto the cosine coefficients, -2 * sum_k a_k plus an independent
residual whose variance 2/pi^2 * tail(order+1) matches the law exactly.

A numba kernel accelerates block generation when numba imports cleanly; set
the environment variable LEVYBRIDGE_DISABLE_NUMBA=1 to force the pure-numpy
path.  Both paths share the integer pipeline bit for bit; the transcendental
steps of Box-Muller may differ across backends at the last ulp, so the
determinism contract is per backend.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .zeta_moments import inverse_square_tail

KIND_KL = "kl"
KIND_FOURIER = "fourier"
KIND_POLY = "poly"
KINDS = (KIND_KL, KIND_FOURIER, KIND_POLY)

_MASK32 = np.uint64(0xFFFFFFFF)
_MULT0 = np.uint64(0xD2511F53)
_MULT1 = np.uint64(0xCD9E8D57)
_WEYL0 = np.uint64(0x9E3779B9)
_WEYL1 = np.uint64(0xBB67AE85)
_SHIFT32 = np.uint64(32)
_TWO_NEG64 = 2.0**-64
_TWO_NEG65 = 2.0**-65


def _philox_words(seed: int, stream_ids: np.ndarray, block0: int, nblocks: int):
    """Raw Philox4x32-10 output words for a (stream, block) grid.

    Returns four uint64 arrays of shape (n_streams, nblocks), each holding
    a 32-bit word.  Pure numpy; the reference implementation for the fast
    kernel below.
    """
    s = np.asarray(stream_ids, dtype=np.uint64)
    b = np.uint64(block0) + np.arange(nblocks, dtype=np.uint64)
    shape = (s.size, nblocks)
    c0 = np.broadcast_to(b & _MASK32, shape).copy()
    c1 = np.broadcast_to(b >> _SHIFT32, shape).copy()
    c2 = np.broadcast_to((s & _MASK32)[:, None], shape).copy()
    c3 = np.broadcast_to((s >> _SHIFT32)[:, None], shape).copy()
    k0 = np.uint64(seed) & _MASK32
    k1 = np.uint64(seed) >> _SHIFT32
    for r in range(10):
        if r > 0:
            k0 = (k0 + _WEYL0) & _MASK32
            k1 = (k1 + _WEYL1) & _MASK32
        p0 = _MULT0 * c0
        p1 = _MULT1 * c2
        c0 = (p1 >> _SHIFT32) ^ c1 ^ k0
        c2 = (p0 >> _SHIFT32) ^ c3 ^ k1
        c1 = p1 & _MASK32
        c3 = p0 & _MASK32
    return c0, c1, c2, c3


def _normals_span_numpy(seed: int, stream_ids: np.ndarray, block0: int, nblocks: int) -> np.ndarray:
    x0, x1, x2, x3 = _philox_words(seed, stream_ids, block0, nblocks)
    u1 = ((x0 << _SHIFT32) | x1).astype(np.float64) * _TWO_NEG64 + _TWO_NEG65
    u2 = ((x2 << _SHIFT32) | x3).astype(np.float64) * _TWO_NEG64 + _TWO_NEG65
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = (2.0 * np.pi) * u2
    out = np.empty((u1.shape[0], 2 * nblocks))
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out


def _build_numba_kernel():
    import numba

    @numba.njit(
        "void(uint64, uint64[:], uint64, int64, float64[:, :])",
        cache=True,
        nogil=True,
    )
    def kernel(seed, stream_ids, block0, nblocks, out):  # pragma: no cover - numba
        mask = np.uint64(0xFFFFFFFF)
        m0 = np.uint64(0xD2511F53)
        m1 = np.uint64(0xCD9E8D57)
        w0 = np.uint64(0x9E3779B9)
        w1 = np.uint64(0xBB67AE85)
        sh = np.uint64(32)
        key0 = seed & mask
        key1 = seed >> sh
        two_pi = 2.0 * np.pi
        for si in range(stream_ids.size):
            s_lo = stream_ids[si] & mask
            s_hi = stream_ids[si] >> sh
            for bi in range(nblocks):
                blk = block0 + np.uint64(bi)
                c0 = blk & mask
                c1 = blk >> sh
                c2 = s_lo
                c3 = s_hi
                k0 = key0
                k1 = key1
                for r in range(10):
                    if r > 0:
                        k0 = (k0 + w0) & mask
                        k1 = (k1 + w1) & mask
                    p0 = m0 * c0
                    p1 = m1 * c2
                    c0 = (p1 >> sh) ^ c1 ^ k0
                    c2 = (p0 >> sh) ^ c3 ^ k1
                    c1 = p1 & mask
                    c3 = p0 & mask
                u1 = float((c0 << sh) | c1) * 2.0**-64 + 2.0**-65
                u2 = float((c2 << sh) | c3) * 2.0**-64 + 2.0**-65
                radius = np.sqrt(-2.0 * np.log(u1))
                angle = two_pi * u2
                out[si, 2 * bi] = radius * np.cos(angle)
                out[si, 2 * bi + 1] = radius * np.sin(angle)

    return kernel


_NUMBA_KERNEL = None
if not os.environ.get("LEVYBRIDGE_DISABLE_NUMBA"):
    try:
        _NUMBA_KERNEL = _build_numba_kernel()
    except ImportError:  # numba genuinely unavailable
        _NUMBA_KERNEL = None


def _normals_span(seed: int, stream_ids: np.ndarray, block0: int, nblocks: int) -> np.ndarray:
    if _NUMBA_KERNEL is None:
        return _normals_span_numpy(seed, stream_ids, block0, nblocks)
    ids = np.ascontiguousarray(stream_ids, dtype=np.uint64)
    out = np.empty((ids.size, 2 * nblocks))
    _NUMBA_KERNEL(np.uint64(seed), ids, np.uint64(block0), nblocks, out)
    return out


def _check_seed(seed: int) -> int:
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return int(seed)


def normals_batch(seed: int, stream_ids: np.ndarray, first: int, count: int) -> np.ndarray:
    """Standard normals at positions [first, first + count) of many streams.

    Shape (len(stream_ids), count).  Values depend only on
    (seed, stream_id, position), never on the batch they were fetched in.
    """
    _check_seed(seed)
    if first < 0 or count < 0:
        raise ValueError("position range must be non-negative")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    if count == 0:
        return np.empty((ids.size, 0))
    b0 = first // 2
    b1 = (first + count + 1) // 2
    span = _normals_span(seed, ids, b0, b1 - b0)
    off = first - 2 * b0
    return span[:, off : off + count]


@dataclass(frozen=True)
class RngStream:
    """One logical substream: (seed, stream_id) fixes the whole sequence."""

    seed: int
    stream_id: int

    def normals(self, count: int, first: int = 0) -> np.ndarray:
        return normals_batch(self.seed, np.array([self.stream_id], dtype=np.uint64), first, count)[0]


def standard_normals(stream: RngStream, count: int) -> np.ndarray:
    """Draw count i.i.d. standard normals from the stream's origin."""
    return stream.normals(count)


@dataclass(frozen=True)
class CoefficientSet:
    """Gaussian coefficients of one truncated bridge expansion plus W1.

    Arrays are per-k rows of length d.  Fields not belonging to the kind
    are None.  Per-coordinate laws: kl rows are N(0, 1/2); fourier cosine
    and sine rows are N(0, 1/(2 k^2 pi^2)) with the constant coefficient
    N(0, 1/3) correlated to the cosine rows; poly rows are N(0, 1/(2k+1));
    W1 is a standard normal vector independent of the bridge coefficients.
    """

    kind: str
    d: int
    order: int
    w1: np.ndarray
    z: np.ndarray | None = None
    a0: np.ndarray | None = None
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None


@dataclass(frozen=True)
class CoefficientBatch:
    """Batch counterpart of CoefficientSet; leading axis is the sample."""

    kind: str
    d: int
    order: int
    w1: np.ndarray
    z: np.ndarray | None = None
    a0: np.ndarray | None = None
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None

    @property
    def n_samples(self) -> int:
        return self.w1.shape[0]

    def single(self, index: int) -> CoefficientSet:
        pick = lambda arr: None if arr is None else arr[index]
        return CoefficientSet(
            kind=self.kind,
            d=self.d,
            order=self.order,
            w1=self.w1[index],
            z=pick(self.z),
            a0=pick(self.a0),
            a=pick(self.a),
            b=pick(self.b),
            c=pick(self.c),
        )


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown expansion kind {kind!r}, expected one of {KINDS}")
    return kind


def _kl_scale(order: int) -> np.ndarray:
    return np.full(order, math.sqrt(0.5))


def _fourier_scale(order: int) -> np.ndarray:
    k = np.arange(1, order + 1, dtype=np.float64)
    return 1.0 / (k * math.pi * math.sqrt(2.0))


def _poly_scale(order: int) -> np.ndarray:
    k = np.arange(1, order + 1, dtype=np.float64)
    return 1.0 / np.sqrt(2.0 * k + 1.0)


def fourier_residual_std(order: int) -> float:
    """Std dev of the constant-coefficient regression residual.

    The residual variance 2/pi^2 * tail(order+1) equals
    1/3 - sum_{k<=order} 2/(k^2 pi^2) exactly; a negative value cannot
    happen analytically and is reported as an arithmetic failure.
    """
    var = (2.0 / (math.pi * math.pi)) * inverse_square_tail(order + 1)
    if var < 0.0:
        raise ArithmeticError("regression residual variance came out negative")
    return math.sqrt(var)


def sample_coefficients_batch(
    seed: int,
    stream_ids: np.ndarray,
    kind: str,
    order: int,
    d: int,
) -> CoefficientBatch:
    """Draw one CoefficientSet per stream id, vectorised over samples."""
    _check_kind(kind)
    if order < 1:
        raise ValueError("truncation order must be positive")
    if d < 1:
        raise ValueError("dimension must be positive")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    n = ids.size
    if kind == KIND_FOURIER:
        flat = normals_batch(seed, ids, 0, 2 * d * (order + 1))
        w1 = flat[:, :d].copy()
        xi = flat[:, d : 2 * d]
        ab = flat[:, 2 * d :].reshape(n, order, 2, d)
        scale = _fourier_scale(order)[None, :, None]
        a = ab[:, :, 0, :] * scale
        b = ab[:, :, 1, :] * scale
        a0 = -2.0 * a.sum(axis=1) + fourier_residual_std(order) * xi
        return CoefficientBatch(kind=kind, d=d, order=order, w1=w1, a0=a0, a=a, b=b)
    flat = normals_batch(seed, ids, 0, d * (order + 1))
    w1 = flat[:, :d].copy()
    coeffs = flat[:, d:].reshape(n, order, d)
    if kind == KIND_KL:
        z = coeffs * _kl_scale(order)[None, :, None]
        return CoefficientBatch(kind=kind, d=d, order=order, w1=w1, z=z)
    c = coeffs * _poly_scale(order)[None, :, None]
    return CoefficientBatch(kind=kind, d=d, order=order, w1=w1, c=c)


def sample_coefficients(stream: RngStream, kind: str, order: int, d: int) -> CoefficientSet:
    """Draw the Gaussian coefficient system of one expansion truncation."""
    batch = sample_coefficients_batch(
        stream.seed, np.array([stream.stream_id], dtype=np.uint64), kind, order, d
    )
    return batch.single(0)


def fourier_ab_block(
    seed: int, stream_ids: np.ndarray, k_lo: int, k_hi: int, d: int
) -> tuple[np.ndarray, np.ndarray]:
    """Cosine/sine coefficient rows for k in [k_lo, k_hi) without the rest.

    Bitwise identical to the corresponding slice of a full fourier draw;
    used by coupled Monte Carlo estimators whose truncation differences
    only touch a contiguous k range.
    """
    if k_lo < 1 or k_hi < k_lo:
        raise ValueError("need 1 <= k_lo <= k_hi")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    nk = k_hi - k_lo
    if nk == 0:
        empty = np.empty((ids.size, 0, d))
        return empty, empty.copy()
    flat = normals_batch(seed, ids, 2 * d * k_lo, 2 * d * nk)
    ab = flat.reshape(ids.size, nk, 2, d)
    k = np.arange(k_lo, k_hi, dtype=np.float64)
    scale = (1.0 / (k * math.pi * math.sqrt(2.0)))[None, :, None]
    return ab[:, :, 0, :] * scale, ab[:, :, 1, :] * scale


def poly_coeff_block(seed: int, stream_ids: np.ndarray, k_lo: int, k_hi: int, d: int) -> np.ndarray:
    """Polynomial coefficient rows for k in [k_lo, k_hi); see fourier_ab_block."""
    if k_lo < 1 or k_hi < k_lo:
        raise ValueError("need 1 <= k_lo <= k_hi")
    ids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    nk = k_hi - k_lo
    if nk == 0:
        return np.empty((ids.size, 0, d))
    flat = normals_batch(seed, ids, d * k_lo, d * nk)
    coeffs = flat.reshape(ids.size, nk, d)
    k = np.arange(k_lo, k_hi, dtype=np.float64)
    return coeffs * (1.0 / np.sqrt(2.0 * k + 1.0))[None, :, None]


def increment_block(seed: int, stream_ids: np.ndarray, d: int) -> np.ndarray:
    """W1 rows of many streams; the increment sits at positions [0, d)."""
    return normals_batch(seed, stream_ids, 0, d)
