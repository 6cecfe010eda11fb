"""Progressive-edge-growth parity-check construction with ACE screening.

Variables are wired in decreasing target-degree order. Each new edge must
keep the Tanner graph free of 4-cycles (candidate checks at distance <= 3
are excluded) and must not close a short cycle whose approximate cycle EMD
falls below the configured floor. The ACE screen is a depth-bounded min-cost
walk relaxation seeded at the variable's existing checks; walk costs lower-
bound simple-cycle ACE, so accepted graphs always satisfy the constraint
(rejections may occasionally be spurious, which only costs retries).

Rank-deficient results are repaired by moving single edges onto dependent
rows under the same girth/ACE screens, preserving all column degrees.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import sparse

from ..errors import ConstructionError
from . import gf2
from .code import LdpcCode, tanner_girth
from .degrees import DegreeDistribution

_REFERENCE_N = 9118  # block length the depth-10 default was sized for
DEFAULT_ACE_ETA = 4


def default_ace_depth(n: int) -> int:
    """Depth 10 at reference scale, shrunk proportionally for shorter codes."""
    return max(2, round(10 * n / _REFERENCE_N))


def assign_column_degrees(dd: DegreeDistribution, n: int) -> np.ndarray:
    """Integer per-column degrees realizing dd by largest remainder, descending."""
    raw = {d: f * n for d, f in dd.variable_node_fractions.items() if f > 0}
    counts = {d: math.floor(x) for d, x in raw.items()}
    short = n - sum(counts.values())
    by_remainder = sorted(raw, key=lambda d: (raw[d] - math.floor(raw[d]), d), reverse=True)
    for d in by_remainder[:short]:
        counts[d] += 1
    parts = [np.full(c, d, dtype=np.int64) for d, c in sorted(counts.items(), reverse=True) if c > 0]
    return np.concatenate(parts)


class _AttemptFailed(Exception):
    def __init__(self, column: int, reason: str):
        super().__init__(f"column {column}: {reason}")
        self.column = column
        self.reason = reason


def _ace_walk_costs(seeds, v, eta, edge_var, edge_chk, n, m, rounds) -> np.ndarray:
    """Min cost of walks from any seed check, avoiding variable v.

    Entry c lower-bounds the ACE of any cycle closed by a new edge (v, c)
    within 2*(rounds+1) edges; unreachable checks stay at +inf.
    """
    dc = np.full(m, np.inf)
    dc[seeds] = eta[v]
    dv = np.full(n, np.inf)
    for _ in range(rounds):
        dv_new = dv.copy()
        np.minimum.at(dv_new, edge_var, dc[edge_chk] + eta[edge_var])
        dv_new[v] = np.inf
        dc_new = dc.copy()
        np.minimum.at(dc_new, edge_chk, dv_new[edge_var])
        if np.array_equal(dc_new, dc) and np.array_equal(dv_new, dv):
            break
        dv, dc = dv_new, dc_new
    return dc


def _forbidden_within_distance3(v, var_checks, check_vars, m) -> np.ndarray:
    """Checks at Tanner distance 1 or 3 from v (edge there would close a 4-cycle)."""
    forbidden = np.zeros(m, dtype=bool)
    mine = var_checks[v]
    forbidden[mine] = True
    seen_vars = set()
    for c in mine:
        seen_vars.update(check_vars[c])
    seen_vars.discard(v)
    for u in seen_vars:
        forbidden[var_checks[u]] = True
    return forbidden


def _grow_graph(degs, m, ace_depth, ace_eta, rng):
    n = degs.shape[0]
    e_total = int(degs.sum())
    var_checks: list[list[int]] = [[] for _ in range(n)]
    check_vars: list[list[int]] = [[] for _ in range(m)]
    check_deg = np.zeros(m, dtype=np.int64)
    eta = degs.astype(np.float64) - 2.0
    edge_var = np.empty(e_total, dtype=np.int64)
    edge_chk = np.empty(e_total, dtype=np.int64)
    ecount = 0
    run_ace = ace_depth >= 3 and ace_eta > 0
    ace_rounds = ace_depth - 1

    for v in range(n):
        for t in range(int(degs[v])):
            if t == 0:
                mask = np.ones(m, dtype=bool)
            else:
                mask = ~_forbidden_within_distance3(v, var_checks, check_vars, m)
                # cycles through v have ACE >= eta[v], so the screen only
                # matters for variables below the floor
                if run_ace and eta[v] < ace_eta and mask.any() and ecount:
                    costs = _ace_walk_costs(
                        var_checks[v], v, eta,
                        edge_var[:ecount], edge_chk[:ecount], n, m, ace_rounds,
                    )
                    mask &= costs >= ace_eta
            cands = np.nonzero(mask)[0]
            if cands.size == 0:
                raise _AttemptFailed(v, "no check passes the girth/ACE screen")
            lowest = cands[check_deg[cands] == check_deg[cands].min()]
            c = int(rng.choice(lowest))
            var_checks[v].append(c)
            check_vars[c].append(v)
            check_deg[c] += 1
            edge_var[ecount] = v
            edge_chk[ecount] = c
            ecount += 1
    pair_owner: dict[tuple[int, int], int] = {}
    for v in range(n):
        for pair in itertools.combinations(sorted(var_checks[v]), 2):
            pair_owner[pair] = v
    return var_checks, check_vars, check_deg, pair_owner


def _adjacency_to_dense(var_checks, n, m) -> np.ndarray:
    h = np.zeros((m, n), dtype=np.uint8)
    for v, checks in enumerate(var_checks):
        h[checks, v] = 1
    return h


def _edges_arrays(var_checks, n):
    ev, ec = [], []
    for v, checks in enumerate(var_checks):
        ev.extend([v] * len(checks))
        ec.extend(checks)
    return np.array(ev, dtype=np.int64), np.array(ec, dtype=np.int64)


def _repair_rank(var_checks, check_vars, check_deg, pair_owner, degs,
                 m, ace_depth, ace_eta, rng, max_moves=60) -> bool:
    """Move single edges onto dependent rows until H reaches full row rank."""
    n = len(var_checks)
    eta = degs.astype(np.float64) - 2.0
    run_ace = ace_depth >= 3 and ace_eta > 0
    moves = 0
    while moves < max_moves:
        dep = gf2.dependent_rows(_adjacency_to_dense(var_checks, n, m))
        if not dep:
            return True
        r = dep[int(rng.integers(len(dep)))]
        moved = False
        for _ in range(40):
            u = int(rng.integers(n))
            if len(var_checks[u]) < 2 or r in var_checks[u]:
                continue
            donor = max(var_checks[u], key=lambda c: check_deg[c])
            rest = [c for c in var_checks[u] if c != donor]
            new_pairs = [tuple(sorted((r, c))) for c in rest]
            if any(p in pair_owner and pair_owner[p] != u for p in new_pairs):
                continue
            # apply the move tentatively
            var_checks[u].remove(donor)
            check_vars[donor].remove(u)
            check_deg[donor] -= 1
            if run_ace:
                ev, ec = _edges_arrays(var_checks, n)
                costs = _ace_walk_costs(var_checks[u], u, eta, ev, ec, n, m, ace_depth - 1)
                if var_checks[u] and costs[r] < ace_eta:
                    var_checks[u].append(donor)
                    check_vars[donor].append(u)
                    check_deg[donor] += 1
                    continue
            for c in rest:
                pair_owner.pop(tuple(sorted((donor, c))), None)
            for p in new_pairs:
                pair_owner[p] = u
            var_checks[u].append(r)
            check_vars[r].append(u)
            check_deg[r] += 1
            moved = True
            break
        moves += 1
        if not moved:
            return False
    return not gf2.dependent_rows(_adjacency_to_dense(var_checks, n, m))


def verify_min_ace(var_checks, degs, n, m, ace_depth, floor: float = np.inf) -> float:
    """Smallest walk-detected cycle ACE within length 2*ace_depth (inf if none).

    Walk relaxation can only under-estimate, so a returned value >= eta
    certifies every simple cycle in range. Exact for depth <= 5 given
    girth >= 6. Variables whose own degree-2 weight already meets `floor`
    are skipped: every cycle through them trivially satisfies it.
    """
    if 2 * ace_depth < 6:
        return np.inf  # girth >= 6 leaves nothing in range to check
    eta = degs.astype(np.float64) - 2.0
    ev, ec = _edges_arrays(var_checks, n)
    best = np.inf
    for v in range(n):
        checks = var_checks[v]
        if len(checks) < 2 or eta[v] >= floor:
            continue
        for i, start in enumerate(checks):
            costs = _ace_walk_costs([start], v, eta, ev, ec, n, m, ace_depth - 1)
            others = [c for c in checks if c != start]
            closing = costs[others]
            if closing.size:
                best = min(best, float(closing.min()))
    return best


def construct_peg_ace(dd: DegreeDistribution, n: int, k: int,
                      ace_depth: int | None = None, ace_eta: int = DEFAULT_ACE_ETA,
                      seed: int = 0, max_attempts: int = 12) -> LdpcCode:
    """Build an (n, k) code realizing dd's column degrees, girth >= 6, ACE-screened.

    Deterministic for a given seed. Raises ConstructionError when the degree
    demand provably exceeds the 4-cycle-free pair budget, or when all
    attempts fail.
    """
    m = n - k
    if n <= 0 or k <= 0 or m < 2:
        raise ValueError(f"need n > k > 0 with at least 2 checks, got n={n}, k={k}")
    if ace_depth is None:
        ace_depth = default_ace_depth(n)
    if ace_depth < 2:
        raise ValueError("ace_depth must be >= 2")
    if ace_eta < 0:
        raise ValueError("ace_eta must be >= 0")

    degs = assign_column_degrees(dd, n)
    if degs.shape[0] != n:
        raise ConstructionError("degree assignment does not cover all columns")
    if degs.max() > m:
        raise ConstructionError(f"max column degree {degs.max()} exceeds {m} checks")
    pair_demand = int(sum(d * (d - 1) // 2 for d in degs))
    pair_budget = m * (m - 1) // 2
    if pair_demand > pair_budget:
        raise ConstructionError(
            f"girth 6 is impossible: columns need {pair_demand} distinct check pairs "
            f"but only {pair_budget} exist for {m} checks"
        )
    if not np.any(degs % 2):
        # all-even column degrees make the rows sum to zero mod 2
        raise ConstructionError(
            "every realized column degree is even, which forces linearly dependent "
            "rows; full row rank is impossible for this distribution at this n"
        )

    last_fail: _AttemptFailed | None = None
    for attempt in range(max_attempts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
        try:
            var_checks, check_vars, check_deg, pair_owner = _grow_graph(
                degs, m, ace_depth, ace_eta, rng)
        except _AttemptFailed as exc:
            last_fail = exc
            continue
        if not _repair_rank(var_checks, check_vars, check_deg, pair_owner,
                            degs, m, ace_depth, ace_eta, rng):
            last_fail = _AttemptFailed(-1, "rank repair failed")
            continue

        rows, cols = [], []
        for v, checks in enumerate(var_checks):
            cols.extend([v] * len(checks))
            rows.extend(checks)
        h = sparse.coo_matrix(
            (np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=(m, n)).tocsr()

        girth = tanner_girth(h)
        if girth == 4:
            last_fail = _AttemptFailed(-1, "internal girth screen failure")
            continue
        min_ace = verify_min_ace(var_checks, degs, n, m, ace_depth, floor=ace_eta)
        if ace_eta > 0 and min_ace < ace_eta:
            last_fail = _AttemptFailed(-1, f"final ACE verification found cycle ACE {min_ace}")
            continue

        target_counts = {int(d): int(c) for d, c in zip(*np.unique(degs, return_counts=True))}
        deviations = {
            d: abs(target_counts.get(d, 0) - f * n)
            for d, f in dd.variable_node_fractions.items() if f > 0
        }
        realized_check_hist = {int(d): int(c) for d, c in
                               zip(*np.unique(check_deg, return_counts=True))}
        meta = {
            "girth": int(girth) if girth else 0,
            "ace_depth": int(ace_depth),
            "ace_eta": int(ace_eta),
            "min_detected_ace": min_ace,
            "seed": int(seed),
            "attempts": attempt + 1,
            "column_degree_counts": target_counts,
            "column_degree_deviation": deviations,
            "check_degree_histogram": realized_check_hist,
        }
        return LdpcCode(h, meta=meta)

    detail = f"; last failure: {last_fail}" if last_fail else ""
    raise ConstructionError(f"construction failed after {max_attempts} attempts{detail}")
