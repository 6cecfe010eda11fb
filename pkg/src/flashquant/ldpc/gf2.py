"""Dense GF(2) elimination helpers for parity-check matrices."""

from __future__ import annotations

import numpy as np


def rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns (R, pivot_cols); rank = len(pivot_cols). Input is not modified.
    """
    r = np.array(a, dtype=np.uint8) & 1
    rows, cols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        hit = np.nonzero(r[row:, col])[0]
        if hit.size == 0:
            continue
        piv = row + int(hit[0])
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        others = np.nonzero(r[:, col])[0]
        others = others[others != row]
        if others.size:
            r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: np.ndarray) -> int:
    return len(rref(a)[1])


def dependent_rows(a: np.ndarray) -> list[int]:
    """Indices of rows outside a maximal independent row set (greedy order)."""
    r = np.array(a, dtype=np.uint8) & 1
    rows = r.shape[0]
    basis: list[np.ndarray] = []
    basis_lead: list[int] = []
    dep: list[int] = []
    for i in range(rows):
        v = r[i].copy()
        while True:
            nz = np.nonzero(v)[0]
            if nz.size == 0:
                dep.append(i)
                break
            lead = int(nz[0])
            if lead in basis_lead:
                v ^= basis[basis_lead.index(lead)]
                continue
            basis.append(v)
            basis_lead.append(lead)
            break
    return dep
