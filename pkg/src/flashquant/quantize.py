"""Word-line voltage quantization of the flash read channel.

M word-line reads split the threshold-voltage axis into M+1 regions, turning
the N-level cell into an N-input (M+1)-output discrete memoryless channel.
This module builds that channel's transition matrix, scores it by mutual
information, and places the voltages three ways: maximum mutual information
(cyclic coordinate ascent with golden-section line searches), constant
adjacent-pdf ratio, and hard (pdf crossing) placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .channel import FlashChannelModel, Gaussian, cdf_eval, pack_params
from .errors import NumericalError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden-section step ratio


@dataclass(frozen=True)
class WordLineVoltages:
    """Strictly increasing read voltages q_1 < ... < q_M."""

    thresholds: tuple[float, ...]

    def __init__(self, thresholds):
        t = tuple(float(x) for x in thresholds)
        if len(t) < 1:
            raise ValueError("need at least one threshold")
        if not all(map(math.isfinite, t)):
            raise ValueError("thresholds must be finite")
        if any(a >= b for a, b in zip(t, t[1:])):
            raise ValueError(f"thresholds must be strictly increasing, got {t}")
        object.__setattr__(self, "thresholds", t)

    def __len__(self) -> int:
        return len(self.thresholds)

    def as_array(self) -> np.ndarray:
        return np.array(self.thresholds)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic N x (M+1) conditional pmf of region index given level."""

    probs: np.ndarray

    def __init__(self, probs):
        p = np.array(probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("transition matrix must be 2-D")
        if np.any(p < -1e-15) or np.any(p > 1.0 + 1e-12):
            raise ValueError("entries must be probabilities in [0, 1]")
        rowsum = p.sum(axis=1)
        if np.any(np.abs(rowsum - 1.0) > 1e-12):
            raise ValueError(f"rows must sum to 1 within 1e-12, got sums {rowsum}")
        p[p < 0.0] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def num_inputs(self) -> int:
        return self.probs.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True)
class InputDistribution:
    """Prior over written levels; defaults everywhere to uniform."""

    probs: np.ndarray

    def __init__(self, probs):
        p = np.array(probs, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("input distribution must be a 1-D vector of >= 2 probabilities")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 within 1e-12, got {p.sum()}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n: int) -> "InputDistribution":
        return cls(np.full(n, 1.0 / n))


def _thresholds_array(wl) -> np.ndarray:
    if isinstance(wl, WordLineVoltages):
        return wl.as_array()
    arr = np.asarray(wl, dtype=float).reshape(-1)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0)):
        raise ValueError(f"thresholds must be finite and strictly increasing, got {arr}")
    return arr


def build_transition_matrix(model: FlashChannelModel, wl) -> TransitionMatrix:
    """Region-occupancy probabilities per level for the given read voltages.

    Accepts a WordLineVoltages or any (possibly empty) increasing sequence;
    an empty sequence yields the single-region N x 1 matrix of ones.
    """
    q = _thresholds_array(wl)
    n = model.num_levels
    probs = np.empty((n, q.size + 1))
    for i in range(n):
        c = np.concatenate(([0.0], cdf_eval(model, i, q), [1.0])) if q.size else np.array([0.0, 1.0])
        probs[i] = np.diff(c)
    return TransitionMatrix(probs)


def mutual_information(T, px=None) -> float:
    """I(X;Y) in bits between level and region index, with 0*log(0) = 0."""
    p = T.probs if isinstance(T, TransitionMatrix) else TransitionMatrix(T).probs
    if px is None:
        w = np.full(p.shape[0], 1.0 / p.shape[0])
    else:
        w = px.probs if isinstance(px, InputDistribution) else InputDistribution(px).probs
    if w.shape[0] != p.shape[0]:
        raise ValueError(f"input distribution has {w.shape[0]} entries for {p.shape[0]} channel inputs")
    py = w @ p
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log2(p / py[np.newaxis, :])
        terms = w[:, np.newaxis] * p * ratio
    terms[p == 0.0] = 0.0  # 0*log(0) convention; also kills py=0 columns
    return float(terms.sum())


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of optimize_mmi; defaults follow the shipped engineering choices."""

    bracket: tuple[float, float] | None = None  # defaults to model support +-8 sigma
    multistarts: int = 8
    max_sweeps: int = 200
    mi_tol: float = 1e-9  # sweep-to-sweep MI gain that counts as converged (bits)
    coord_tol: float = 1e-7  # golden-section interval width, volts
    seed: int = 0


class MmiResult(NamedTuple):
    voltages: WordLineVoltages
    mi_bits: float
    converged: bool
    sweeps: int
    collapse_repaired: bool  # thresholds collided and were re-separated


def _golden_max(f, lo: float, hi: float, xtol: float):
    """Golden-section maximization on [lo, hi]; assumes local unimodality."""
    a, b = lo, hi
    h = b - a
    c = b - _INVPHI * h
    d = a + _INVPHI * h
    fc, fd = f(c), f(d)
    while h > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INVPHI * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


_MIN_GAP = 1e-9  # below this, thresholds count as collapsed
_SEP = 1e-6  # re-separation applied to collapsed thresholds


def _reseparate(q: np.ndarray) -> bool:
    """Force strict increase by nudging collapsed thresholds apart in place."""
    touched = False
    for j in range(1, q.size):
        if q[j] - q[j - 1] < _MIN_GAP:
            q[j] = q[j - 1] + _SEP
            touched = True
    return touched


def optimize_mmi(model: FlashChannelModel, M: int, search: SearchConfig | None = None) -> MmiResult:
    """Maximize the induced channel's mutual information over M read voltages.

    Cyclic coordinate ascent: each voltage is line-searched by golden section
    on the open interval between its neighbors. Multiple starts (one mixture
    quantile start plus seeded random starts) guard against the MI surface
    not being globally quasi-concave; the best run wins, ties broken by
    lexicographically smallest thresholds.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    cfg = search or SearchConfig()
    lo, hi = cfg.bracket if cfg.bracket is not None else model.support(8.0)
    if not (lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise NumericalError(f"bracket ({lo}, {hi}) cannot hold an increasing threshold set")
    if (hi - lo) <= (M + 1) * _SEP:
        raise NumericalError(f"bracket ({lo}, {hi}) too narrow for {M} distinct thresholds")

    family, p1, p2, p3 = pack_params(model)
    px = np.full(model.num_levels, 1.0 / model.num_levels)

    def mi_of(q: np.ndarray) -> float:
        return _kernels.mi_bits(family, p1, p2, p3, q, px)

    starts = [_quantile_start(model, M, lo, hi)]
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < max(1, cfg.multistarts):
        q = np.sort(rng.uniform(lo, hi, M))
        _reseparate(q)
        starts.append(q)

    best: tuple[float, tuple, bool, int, bool] | None = None
    for q0 in starts:
        q = q0.copy()
        cur = mi_of(q)
        converged = False
        collapse = False
        sweeps = 0
        for sweeps in range(1, cfg.max_sweeps + 1):
            for j in range(M):
                left = q[j - 1] if j > 0 else lo
                right = q[j + 1] if j < M - 1 else hi
                if right - left <= 4.0 * cfg.coord_tol:
                    continue

                def f(x, j=j):
                    old = q[j]
                    q[j] = x
                    val = mi_of(q)
                    q[j] = old
                    return val

                xj, fj = _golden_max(f, left, right, cfg.coord_tol)
                if fj > cur:
                    q[j] = xj
                    cur = fj
            if _reseparate(q):
                collapse = True
                cur = mi_of(q)
            if sweeps > 1 and cur - prev_mi < cfg.mi_tol:
                converged = True
                break
            prev_mi = cur
        collapse_final = _reseparate(q)
        if collapse_final:
            cur = mi_of(q)
        key = (cur, tuple(-x for x in q))  # max MI, then lexicographically smallest q
        if best is None or key > (best[0], tuple(-x for x in best[1])):
            best = (cur, tuple(q), converged, sweeps, collapse or collapse_final)

    mi, q, converged, sweeps, collapse = best
    return MmiResult(WordLineVoltages(q), mi, converged, sweeps, collapse)


def _quantile_start(model: FlashChannelModel, M: int, lo: float, hi: float) -> np.ndarray:
    """Thresholds at equal-mass quantiles of the uniform level mixture."""
    grid = np.linspace(lo, hi, 4097)
    mix = np.mean([cdf_eval(model, i, grid) for i in range(model.num_levels)], axis=0)
    targets = (np.arange(1, M + 1)) / (M + 1)
    q = np.interp(targets, mix, grid)
    _reseparate(q)
    return np.clip(q, lo + _SEP, hi - _SEP)


def _log_pdf(dist, v: float) -> float:
    if isinstance(dist, Gaussian):
        z = (v - dist.mean) / dist.sigma
        return -0.5 * z * z - math.log(dist.sigma * _kernels.SQRT2PI)
    h = math.log(1.0 / ((dist.center_hi - dist.center_lo) + dist.sigma * _kernels.SQRT2PI))
    if v < dist.center_lo:
        z = (v - dist.center_lo) / dist.sigma
        return h - 0.5 * z * z
    if v <= dist.center_hi:
        return h
    z = (v - dist.center_hi) / dist.sigma
    return h - 0.5 * z * z


_RATIO_TOL = 1e-7  # log-ratio residual target; contract allows 1e-6


def _solve_log_ratio(model: FlashChannelModel, pair: int, target: float) -> float:
    """Voltage between level means where ln f_i(v) - ln f_{i+1}(v) = target."""
    di, dj = model.levels[pair], model.levels[pair + 1]
    lo = float(model.level_means[pair])
    hi = float(model.level_means[pair + 1])

    def h(v: float) -> float:
        return _log_pdf(di, v) - _log_pdf(dj, v) - target

    h_lo, h_hi = h(lo), h(hi)
    if not (h_lo >= 0.0 >= h_hi):
        raise NumericalError(
            f"no ratio solution for levels ({pair},{pair + 1}) with log-ratio {target:.4g}: "
            f"bracket values ({h_lo:.4g}, {h_hi:.4g}) do not straddle zero"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h_mid = h(mid)
        if abs(h_mid) <= _RATIO_TOL:
            return mid
        if h_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            # bracket is one ulp wide: converged in position even when the
            # log-ratio slope is too steep to hit the residual target
            break
    return 0.5 * (lo + hi)


def constant_ratio_thresholds(model: FlashChannelModel, R: float, M: int) -> WordLineVoltages:
    """Voltages where adjacent level pdfs have ratio R (and 1/R for the soft pair).

    M = N-1 places one voltage per adjacent pair at the R = 1 crossing;
    M = 2(N-1) places a pair (q-, q+) per adjacent levels with
    f_i(q-)/f_{i+1}(q-) = R and f_i(q+)/f_{i+1}(q+) = 1/R.
    """
    n = model.num_levels
    if R < 1.0:
        raise ValueError(f"R must be >= 1, got {R}")
    if M not in (n - 1, 2 * (n - 1)):
        raise ValueError(f"M must be {n - 1} or {2 * (n - 1)} for an {n}-level model, got {M}")
    log_r = math.log(R)
    qs: list[float] = []
    for pair in range(n - 1):
        if M == n - 1:
            qs.append(_solve_log_ratio(model, pair, 0.0))
        else:
            if R == 1.0:
                # both pair members would coincide at the crossing
                raise ValueError("R=1 with two reads per pair is degenerate; use M=N-1")
            q_minus = _solve_log_ratio(model, pair, log_r)
            q_plus = _solve_log_ratio(model, pair, -log_r)
            qs.extend([q_minus, q_plus])
    if any(a >= b for a, b in zip(qs, qs[1:])):
        raise NumericalError(f"ratio R={R} produces a non-monotone threshold set {qs}")
    return WordLineVoltages(qs)


def hard_thresholds(model: FlashChannelModel) -> WordLineVoltages:
    """The N-1 adjacent-pdf crossing voltages (conventional hard read)."""
    return constant_ratio_thresholds(model, 1.0, model.num_levels - 1)


def save_matrix_txt(T: TransitionMatrix, path) -> None:
    """Row-major plain text, 17 significant digits per entry."""
    with open(path, "w") as fh:
        for row in T.probs:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_matrix_txt(path) -> TransitionMatrix:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split()])
    return TransitionMatrix(np.array(rows))
