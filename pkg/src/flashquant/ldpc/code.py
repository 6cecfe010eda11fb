"""Parity-check matrix container, systematic encoding, and alist files."""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ..errors import ConstructionError
from . import gf2


class LdpcCode:
    """Binary code defined by a sparse m x n parity-check matrix of full row rank.

    Encoding is systematic via a one-time GF(2) Gauss-Jordan pass: message
    bits occupy `message_cols` (the non-pivot columns), parity bits occupy
    `pivot_cols`. The reduction is cached on first use.
    """

    def __init__(self, H, meta: dict | None = None):
        h = sparse.csr_matrix(H, dtype=np.uint8)
        h.sum_duplicates()
        if h.nnz and h.data.max() > 1:
            raise ValueError("parity-check matrix has repeated edges")
        h.data = h.data % 2
        h.eliminate_zeros()
        m, n = h.shape
        if m >= n:
            raise ValueError(f"need more columns than rows, got {m}x{n}")
        self.H = h
        self.n = n
        self.k = n - m
        self.meta = dict(meta or {})
        self._systematic: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @property
    def num_checks(self) -> int:
        return self.H.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def column_degrees(self) -> np.ndarray:
        return np.asarray((self.H != 0).sum(axis=0)).ravel()

    def row_degrees(self) -> np.ndarray:
        return np.asarray((self.H != 0).sum(axis=1)).ravel()

    def _ensure_systematic(self):
        if self._systematic is not None:
            return
        dense = self.H.toarray()
        reduced, pivots = gf2.rref(dense)
        if len(pivots) < self.num_checks:
            raise ConstructionError(
                f"H is rank-deficient: rank {len(pivots)} < {self.num_checks} rows"
            )
        pivot_cols = np.array(pivots, dtype=np.int64)
        mask = np.ones(self.n, dtype=bool)
        mask[pivot_cols] = False
        message_cols = np.nonzero(mask)[0]
        parity_map = reduced[:, message_cols].astype(np.int32)
        self._systematic = (message_cols, pivot_cols, parity_map)

    @property
    def message_cols(self) -> np.ndarray:
        """Column indices carrying the k message bits (documented index set)."""
        self._ensure_systematic()
        return self._systematic[0]

    @property
    def parity_cols(self) -> np.ndarray:
        self._ensure_systematic()
        return self._systematic[1]

    def encode(self, message) -> np.ndarray:
        """Codeword with H @ cw = 0 (mod 2); message bits land on message_cols."""
        msg = np.asarray(message, dtype=np.int32).reshape(-1)
        if msg.shape[0] != self.k:
            raise ValueError(f"message must have {self.k} bits, got {msg.shape[0]}")
        if np.any((msg != 0) & (msg != 1)):
            raise ValueError("message must be binary")
        self._ensure_systematic()
        message_cols, pivot_cols, parity_map = self._systematic
        cw = np.zeros(self.n, dtype=np.uint8)
        cw[message_cols] = msg
        cw[pivot_cols] = (parity_map @ msg) & 1
        return cw

    def syndrome(self, bits) -> np.ndarray:
        v = np.asarray(bits, dtype=np.uint8).reshape(-1)
        return np.asarray(self.H.dot(v.astype(np.int64)) % 2, dtype=np.uint8)

    def girth(self) -> int:
        """Length of the shortest Tanner-graph cycle (cached in meta)."""
        if "girth" not in self.meta:
            self.meta["girth"] = tanner_girth(self.H)
        return self.meta["girth"]


def tanner_girth(H) -> int:
    """Shortest cycle length via BFS from every check node.

    Returns 0 for a forest. Stops early once a 4-cycle, or a 6-cycle in a
    4-cycle-free graph, is found (nothing shorter can exist).
    """
    h = sparse.csr_matrix(H).astype(np.int64)
    m, n = h.shape
    hc = h.tocsc()
    row_ptr, row_cols = h.indptr, h.indices
    col_ptr, col_rows = hc.indptr, hc.indices
    gram = h.dot(h.T)
    off = gram - sparse.diags(gram.diagonal())
    if off.nnz and off.max() >= 2:
        return 4
    best = np.inf
    # node ids: checks 0..m-1, variables m..m+n-1
    dist = np.empty(m + n, dtype=np.int64)
    parent = np.empty(m + n, dtype=np.int64)
    for root in range(m):
        dist[:] = -1
        parent[:] = -1
        dist[root] = 0
        frontier = [root]
        depth = 0
        while frontier and 2 * depth + 2 < best:
            nxt = []
            for u in frontier:
                if u < m:
                    neigh = row_cols[row_ptr[u]:row_ptr[u + 1]] + m
                else:
                    neigh = col_rows[col_ptr[u - m]:col_ptr[u - m + 1]]
                for w in neigh:
                    w = int(w)
                    if w == parent[u]:
                        continue
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1
                        parent[w] = u
                        nxt.append(w)
                    else:
                        cyc = dist[u] + dist[w] + 1
                        if cyc < best:
                            best = cyc
            frontier = nxt
            depth += 1
        if best <= 6:
            return int(best)
    return 0 if not np.isfinite(best) else int(best)


def save_alist(code_or_H, path) -> None:
    """Write H in the standard alist interchange format (1-based, 0-padded)."""
    h = code_or_H.H if isinstance(code_or_H, LdpcCode) else sparse.csr_matrix(code_or_H)
    h = sparse.csr_matrix(h)
    m, n = h.shape
    hc = h.tocsc()
    col_lists = [hc.indices[hc.indptr[j]:hc.indptr[j + 1]] + 1 for j in range(n)]
    row_lists = [h.indices[h.indptr[i]:h.indptr[i + 1]] + 1 for i in range(m)]
    dmax_col = max((len(c) for c in col_lists), default=0)
    dmax_row = max((len(r) for r in row_lists), default=0)
    lines = [f"{n} {m}", f"{dmax_col} {dmax_row}"]
    lines.append(" ".join(str(len(c)) for c in col_lists))
    lines.append(" ".join(str(len(r)) for r in row_lists))
    for c in col_lists:
        padded = list(map(str, sorted(c))) + ["0"] * (dmax_col - len(c))
        lines.append(" ".join(padded))
    for r in row_lists:
        padded = list(map(str, sorted(r))) + ["0"] * (dmax_row - len(r))
        lines.append(" ".join(padded))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_alist(path) -> LdpcCode:
    """Read an alist file back into an LdpcCode."""
    with open(path) as fh:
        tokens_per_line = [line.split() for line in fh if line.strip()]
    if len(tokens_per_line) < 4:
        raise ValueError(f"{path}: truncated alist file")
    n, m = (int(x) for x in tokens_per_line[0][:2])
    col_degs = [int(x) for x in tokens_per_line[2]]
    row_degs = [int(x) for x in tokens_per_line[3]]
    if len(col_degs) != n or len(row_degs) != m:
        raise ValueError(f"{path}: degree list lengths do not match n={n}, m={m}")
    col_lines = tokens_per_line[4:4 + n]
    if len(col_lines) < n:
        raise ValueError(f"{path}: missing column index lines")
    rows: list[int] = []
    cols: list[int] = []
    for j, line in enumerate(col_lines):
        entries = [int(x) for x in line if int(x) != 0]
        if len(entries) != col_degs[j]:
            raise ValueError(f"{path}: column {j} lists {len(entries)} entries, expected {col_degs[j]}")
        for i in entries:
            if not (1 <= i <= m):
                raise ValueError(f"{path}: column {j} references check {i} outside 1..{m}")
            rows.append(i - 1)
            cols.append(j)
    h = sparse.coo_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=(m, n))
    return LdpcCode(h.tocsr(), meta={"source": str(path)})
