"""Jit-compiled scalar kernels for the quantizer hot paths.

The coordinate-ascent search and the grid oracles evaluate mutual information
millions of times; doing that through the numpy object layer is ~50x slower.
Channel models are passed as the flat (family, p1, p2, p3) arrays produced by
channel.pack_params.
"""

import math

import numpy as np
from numba import njit

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
LOG2 = math.log(2.0)


@njit(cache=True, nogil=True)
def cdf_scalar(family, p1, p2, p3, level, v):
    if family[level] == 0:
        z = (v - p1[level]) / (p2[level] * SQRT2)
        return 0.5 * math.erfc(-z)
    lo = p1[level]
    sig = p2[level]
    hi = p3[level]
    h = 1.0 / ((hi - lo) + sig * SQRT2PI)
    tail = h * sig * SQRT2PI
    if v < lo:
        return tail * 0.5 * math.erfc(-(v - lo) / (sig * SQRT2))
    if v <= hi:
        return 0.5 * tail + h * (v - lo)
    return 0.5 * tail + h * (hi - lo) + tail * (0.5 - 0.5 * math.erfc((v - hi) / (sig * SQRT2)))


@njit(cache=True, nogil=True)
def pdf_scalar(family, p1, p2, p3, level, v):
    if family[level] == 0:
        z = (v - p1[level]) / p2[level]
        return math.exp(-0.5 * z * z) / (p2[level] * SQRT2PI)
    lo = p1[level]
    sig = p2[level]
    hi = p3[level]
    h = 1.0 / ((hi - lo) + sig * SQRT2PI)
    if v < lo:
        z = (v - lo) / sig
        return h * math.exp(-0.5 * z * z)
    if v <= hi:
        return h
    z = (v - hi) / sig
    return h * math.exp(-0.5 * z * z)


@njit(cache=True, nogil=True)
def fill_transition(family, p1, p2, p3, thresholds, out):
    """out[i, j] = mass of level i between thresholds j-1 and j (+-inf at the ends)."""
    n = family.shape[0]
    m = thresholds.shape[0]
    for i in range(n):
        prev = 0.0
        for j in range(m):
            c = cdf_scalar(family, p1, p2, p3, i, thresholds[j])
            out[i, j] = c - prev
            prev = c
        out[i, m] = 1.0 - prev


@njit(cache=True, nogil=True)
def mi_bits(family, p1, p2, p3, thresholds, px):
    """I(X;Y) in bits of the DMC induced by the thresholds, inputs weighted by px."""
    n = family.shape[0]
    m = thresholds.shape[0]
    t = np.empty((n, m + 1))
    fill_transition(family, p1, p2, p3, thresholds, t)
    mi = 0.0
    for j in range(m + 1):
        py = 0.0
        for i in range(n):
            py += px[i] * t[i, j]
        if py <= 0.0:
            continue
        for i in range(n):
            pij = t[i, j]
            if pij > 0.0:
                mi += px[i] * pij * math.log(pij / py)
    return mi / LOG2
