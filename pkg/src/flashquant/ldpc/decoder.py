"""Belief-propagation decoders: layered (sequential per-row) and flooding.

Layered is the production decoder: check rows are processed one at a time and
posteriors are updated immediately, so good frames converge in a handful of
iterations. The flooding decoder exists for cross-checking fixed points.
Check updates use the exact pairwise box-plus recursion by default; min-sum
is available as a speed/accuracy study knob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

# message given to a variable by a degree-1 check (pins the bit to zero)
_DEG1_LLR = 100.0


@dataclass(frozen=True)
class DecodeResult:
    hard_bits: np.ndarray  # uint8, length n
    converged: bool
    iterations_used: int


@njit(cache=True, nogil=True, inline="always")
def _boxplus(a, b):
    if (a >= 0.0) == (b >= 0.0):
        m = min(abs(a), abs(b))
    else:
        m = -min(abs(a), abs(b))
    return m + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@njit(cache=True, nogil=True, inline="always")
def _signmin(a, b):
    if (a >= 0.0) == (b >= 0.0):
        return min(abs(a), abs(b))
    return -min(abs(a), abs(b))


@njit(cache=True, nogil=True)
def _syndrome_ok(row_ptr, row_cols, post):
    m = row_ptr.shape[0] - 1
    for r in range(m):
        par = 0
        for idx in range(row_ptr[r], row_ptr[r + 1]):
            if post[row_cols[idx]] < 0.0:
                par ^= 1
        if par:
            return False
    return True


@njit(cache=True, nogil=True)
def _layered(row_ptr, row_cols, llr, max_iters, min_sum):
    n = llr.shape[0]
    m = row_ptr.shape[0] - 1
    post = llr.copy()
    rmsg = np.zeros(row_cols.shape[0])
    maxdeg = 0
    for r in range(m):
        d = row_ptr[r + 1] - row_ptr[r]
        if d > maxdeg:
            maxdeg = d
    q = np.empty(maxdeg)
    fwd = np.empty(maxdeg)
    bwd = np.empty(maxdeg)

    if _syndrome_ok(row_ptr, row_cols, post):
        hard = np.empty(n, dtype=np.uint8)
        for i in range(n):
            hard[i] = 1 if post[i] < 0.0 else 0
        return hard, 0, True

    iters = 0
    converged = False
    for it in range(1, max_iters + 1):
        iters = it
        for r in range(m):
            s = row_ptr[r]
            d = row_ptr[r + 1] - s
            if d == 0:
                continue
            for t in range(d):
                q[t] = post[row_cols[s + t]] - rmsg[s + t]
            if d == 1:
                rmsg[s] = _DEG1_LLR
                post[row_cols[s]] = q[0] + _DEG1_LLR
                continue
            fwd[0] = q[0]
            bwd[d - 1] = q[d - 1]
            if min_sum:
                for t in range(1, d):
                    fwd[t] = _signmin(fwd[t - 1], q[t])
                for t in range(d - 2, -1, -1):
                    bwd[t] = _signmin(bwd[t + 1], q[t])
            else:
                for t in range(1, d):
                    fwd[t] = _boxplus(fwd[t - 1], q[t])
                for t in range(d - 2, -1, -1):
                    bwd[t] = _boxplus(bwd[t + 1], q[t])
            for t in range(d):
                if t == 0:
                    new = bwd[1]
                elif t == d - 1:
                    new = fwd[d - 2]
                elif min_sum:
                    new = _signmin(fwd[t - 1], bwd[t + 1])
                else:
                    new = _boxplus(fwd[t - 1], bwd[t + 1])
                rmsg[s + t] = new
                post[row_cols[s + t]] = q[t] + new
        if _syndrome_ok(row_ptr, row_cols, post):
            converged = True
            break
    hard = np.empty(n, dtype=np.uint8)
    for i in range(n):
        hard[i] = 1 if post[i] < 0.0 else 0
    return hard, iters, converged


@njit(cache=True, nogil=True)
def _flooding(row_ptr, row_cols, llr, max_iters, min_sum):
    n = llr.shape[0]
    m = row_ptr.shape[0] - 1
    ne = row_cols.shape[0]
    v2c = np.empty(ne)
    c2v = np.zeros(ne)
    post = llr.copy()
    maxdeg = 0
    for r in range(m):
        d = row_ptr[r + 1] - row_ptr[r]
        if d > maxdeg:
            maxdeg = d
    fwd = np.empty(maxdeg)
    bwd = np.empty(maxdeg)

    for idx in range(ne):
        v2c[idx] = llr[row_cols[idx]]

    if _syndrome_ok(row_ptr, row_cols, post):
        hard = np.empty(n, dtype=np.uint8)
        for i in range(n):
            hard[i] = 1 if post[i] < 0.0 else 0
        return hard, 0, True

    iters = 0
    converged = False
    for it in range(1, max_iters + 1):
        iters = it
        for r in range(m):
            s = row_ptr[r]
            d = row_ptr[r + 1] - s
            if d == 0:
                continue
            if d == 1:
                c2v[s] = _DEG1_LLR
                continue
            fwd[0] = v2c[s]
            bwd[d - 1] = v2c[s + d - 1]
            if min_sum:
                for t in range(1, d):
                    fwd[t] = _signmin(fwd[t - 1], v2c[s + t])
                for t in range(d - 2, -1, -1):
                    bwd[t] = _signmin(bwd[t + 1], v2c[s + t])
            else:
                for t in range(1, d):
                    fwd[t] = _boxplus(fwd[t - 1], v2c[s + t])
                for t in range(d - 2, -1, -1):
                    bwd[t] = _boxplus(bwd[t + 1], v2c[s + t])
            for t in range(d):
                if t == 0:
                    c2v[s] = bwd[1]
                elif t == d - 1:
                    c2v[s + d - 1] = fwd[d - 2]
                elif min_sum:
                    c2v[s + t] = _signmin(fwd[t - 1], bwd[t + 1])
                else:
                    c2v[s + t] = _boxplus(fwd[t - 1], bwd[t + 1])
        for i in range(n):
            post[i] = llr[i]
        for idx in range(ne):
            post[row_cols[idx]] += c2v[idx]
        for idx in range(ne):
            v2c[idx] = post[row_cols[idx]] - c2v[idx]
        if _syndrome_ok(row_ptr, row_cols, post):
            converged = True
            break
    hard = np.empty(n, dtype=np.uint8)
    for i in range(n):
        hard[i] = 1 if post[i] < 0.0 else 0
    return hard, iters, converged


class BpDecoder:
    """Per-code decoder instance.

    Holds the CSR row structure of H. Instances are cheap; use one per thread
    (decode calls on one instance must not overlap).
    """

    def __init__(self, code, max_iters: int = 50, algorithm: str = "sum_product",
                 schedule: str = "layered"):
        if algorithm not in ("sum_product", "min_sum"):
            raise ValueError(f"unknown algorithm {algorithm!r}")
        if schedule not in ("layered", "flooding"):
            raise ValueError(f"unknown schedule {schedule!r}")
        h = code.H.tocsr()
        self.n = code.n
        self.row_ptr = h.indptr.astype(np.int64)
        self.row_cols = h.indices.astype(np.int64)
        self.max_iters = int(max_iters)
        self.min_sum = algorithm == "min_sum"
        self.schedule = schedule

    def decode(self, llrs, max_iters: int | None = None) -> DecodeResult:
        llr = np.ascontiguousarray(llrs, dtype=np.float64)
        if llr.shape != (self.n,):
            raise ValueError(f"expected {self.n} LLRs, got shape {llr.shape}")
        if not np.all(np.isfinite(llr)):
            raise ValueError("channel LLRs must be finite (saturate before decoding)")
        iters = self.max_iters if max_iters is None else int(max_iters)
        kernel = _layered if self.schedule == "layered" else _flooding
        hard, used, converged = kernel(self.row_ptr, self.row_cols, llr, iters, self.min_sum)
        return DecodeResult(hard_bits=hard, converged=bool(converged), iterations_used=int(used))


def decode_layered_bp(code, llrs, max_iters: int = 50, algorithm: str = "sum_product") -> DecodeResult:
    """One-shot layered decode; builds a throwaway decoder instance."""
    return BpDecoder(code, max_iters=max_iters, algorithm=algorithm).decode(llrs)
