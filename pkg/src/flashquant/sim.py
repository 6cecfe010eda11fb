"""End-to-end Monte Carlo frame-error-rate harness.

Per frame: random message -> systematic encode -> consecutive codeword bit
pairs label cells -> sample threshold voltages -> quantize against the word
line voltages -> table LLRs -> layered BP -> error counts. Frame seeds are
derived from the master seed by counter, so results are bit-identical for
any thread count; aggregation is plain summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import FlashChannelModel, Gaussian, GaussianTailsUniformCenter, RetentionParams, retention_model
from .errors import ConfigError
from .ldpc.code import LdpcCode
from .ldpc.decoder import BpDecoder
from .mapping import GrayLabeling, llr_table
from .quantize import (
    SearchConfig,
    WordLineVoltages,
    build_transition_matrix,
    constant_ratio_thresholds,
    hard_thresholds,
    mutual_information,
    optimize_mmi,
)

_Z95 = 1.959963984540054
_BLOCK = 256  # frames per scheduling block; fixed so early stop ignores thread count

METHODS = ("mmi", "constant_ratio", "hard", "explicit")


@dataclass(frozen=True)
class OperatingPoint:
    """One channel condition: retention time (months) and/or a sigma multiplier."""

    t_months: float | None = None
    sigma_scale: float = 1.0

    @property
    def axis_value(self) -> float:
        return self.t_months if self.t_months is not None else self.sigma_scale


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings shared by every operating point of a sweep."""

    reads: int
    method: str
    gaussian: FlashChannelModel | None = None
    retention: RetentionParams | None = None
    ratio: float | None = None
    voltages: tuple[float, ...] | None = None
    trials: int = 20000
    max_iters: int = 50
    seed: int = 0
    stop_frame_errors: int = 100
    algorithm: str = "sum_product"
    threads: int = 1
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown quantization method {self.method!r}")
        if (self.gaussian is None) == (self.retention is None):
            raise ConfigError("exactly one of gaussian/retention model source is required")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.reads < 1:
            raise ConfigError("reads must be >= 1")
        if self.method == "constant_ratio" and (self.ratio is None or self.ratio < 1.0):
            raise ConfigError("constant_ratio requires ratio >= 1")
        if self.method == "explicit":
            if not self.voltages:
                raise ConfigError("explicit method requires voltages")
            if len(self.voltages) != self.reads:
                raise ConfigError(f"{len(self.voltages)} voltages given for {self.reads} reads")


@dataclass(frozen=True)
class SimResult:
    """FER/BER statistics of one operating point."""

    point: OperatingPoint
    method: str
    ratio: float | None
    reads: int
    mi_bits: float
    thresholds: tuple[float, ...]
    frames: int
    frame_errors: int
    undetected_errors: int
    bit_errors: int
    fer: float
    ber: float
    fer_ci_lo: float
    fer_ci_hi: float
    mean_iterations: float

    def __post_init__(self):
        if not (0.0 <= self.fer <= 1.0) or self.frame_errors > self.frames:
            raise ValueError("inconsistent error counts")


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; well behaved at zero or few errors."""
    if trials == 0:
        return (0.0, 1.0)
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return (lo, hi)


def _scale_sigmas(model: FlashChannelModel, scale: float) -> FlashChannelModel:
    if scale == 1.0:
        return model
    levels = []
    for d in model.levels:
        if isinstance(d, Gaussian):
            levels.append(Gaussian(d.mean, d.sigma * scale))
        else:
            levels.append(GaussianTailsUniformCenter(d.center_lo, d.center_hi, d.sigma * scale))
    return FlashChannelModel(levels)


def model_at(cfg: SimConfig, point: OperatingPoint) -> FlashChannelModel:
    if cfg.retention is not None:
        if point.t_months is None:
            raise ConfigError("retention source needs t_months in the operating point")
        base = retention_model(cfg.retention, point.t_months)
    else:
        base = cfg.gaussian
    return _scale_sigmas(base, point.sigma_scale)


def thresholds_for(cfg: SimConfig, model: FlashChannelModel) -> WordLineVoltages:
    n = model.num_levels
    if cfg.method == "mmi":
        return optimize_mmi(model, cfg.reads, cfg.search).voltages
    if cfg.method == "constant_ratio":
        if cfg.reads not in (n - 1, 2 * (n - 1)):
            raise ConfigError(f"constant_ratio needs {n - 1} or {2 * (n - 1)} reads, not {cfg.reads}")
        return constant_ratio_thresholds(model, cfg.ratio, cfg.reads)
    if cfg.method == "hard":
        if cfg.reads != n - 1:
            raise ConfigError(f"hard quantization needs {n - 1} reads, not {cfg.reads}")
        return hard_thresholds(model)
    return WordLineVoltages(cfg.voltages)


class _FrameWorker:
    """Per-thread channel sampler + decoder for one operating point."""

    def __init__(self, code: LdpcCode, cfg: SimConfig, model: FlashChannelModel,
                 thresholds: np.ndarray, llr_tab: np.ndarray, inverse_labels: np.ndarray,
                 point_key: int):
        self.code = code
        self.cfg = cfg
        self.model = model
        self.thresholds = thresholds
        self.llr_tab = llr_tab
        self.inverse_labels = inverse_labels
        self.point_key = point_key
        self.decoder = BpDecoder(code, max_iters=cfg.max_iters, algorithm=cfg.algorithm)
        self.width = inverse_labels.size.bit_length() - 1  # bits per cell

    def run(self, frame_indices) -> tuple[int, int, int, int, int]:
        frames = frame_errors = undetected = bit_errors = iters = 0
        code, cfg = self.code, self.cfg
        num_levels = self.model.num_levels
        for f in frame_indices:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=cfg.seed, spawn_key=(self.point_key, int(f))))
            msg = rng.integers(0, 2, code.k, dtype=np.uint8)
            cw = code.encode(msg)
            pairs = cw.reshape(-1, self.width)
            idx = pairs @ (1 << np.arange(self.width - 1, -1, -1))
            levels = self.inverse_labels[idx]
            volts = np.empty(levels.shape[0])
            for lev in range(num_levels):
                mask = levels == lev
                cnt = int(mask.sum())
                if cnt:
                    volts[mask] = self.model.levels[lev].sample(rng, size=cnt)
            regions = np.searchsorted(self.thresholds, volts, side="right")
            llrs = self.llr_tab[regions].reshape(-1)
            res = self.decoder.decode(llrs)
            if res.converged and code.syndrome(res.hard_bits).any():
                raise AssertionError("decoder reported convergence with nonzero syndrome")
            wrong = not np.array_equal(res.hard_bits, cw)
            frames += 1
            frame_errors += wrong
            undetected += wrong and res.converged
            if wrong:
                bit_errors += int((res.hard_bits[code.message_cols] != msg).sum())
            iters += res.iterations_used
        return frames, frame_errors, undetected, bit_errors, iters


def run_point(code: LdpcCode, cfg: SimConfig, point: OperatingPoint,
              point_key: int = 0) -> SimResult:
    """Simulate one operating point until the trial cap or the error target."""
    if code.n % 2:
        raise ConfigError(f"block length {code.n} is odd; two bits map to each cell")
    model = model_at(cfg, point)
    num_levels = model.num_levels
    width = num_levels.bit_length() - 1
    if code.n % width:
        raise ConfigError(f"block length {code.n} not divisible by {width} bits per cell")
    wl = thresholds_for(cfg, model)
    thr = wl.as_array()
    T = build_transition_matrix(model, wl)
    mi = mutual_information(T)
    labeling = GrayLabeling.reflected(num_levels)
    llr_tab = llr_table(T, labeling)
    inverse = np.empty(num_levels, dtype=np.int64)
    for lev in range(num_levels):
        inverse[int(labeling.bits_of(lev), 2)] = lev

    threads = max(1, cfg.threads)
    workers = [
        _FrameWorker(code, cfg, model, thr, llr_tab, inverse, point_key)
        for _ in range(threads)
    ]
    totals = np.zeros(5, dtype=np.int64)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        start = 0
        while start < cfg.trials and totals[1] < cfg.stop_frame_errors:
            stop = min(start + _BLOCK, cfg.trials)
            block = np.arange(start, stop)
            if pool is None:
                totals += np.array(workers[0].run(block), dtype=np.int64)
            else:
                chunks = np.array_split(block, threads)
                futures = [
                    pool.submit(workers[i].run, chunk)
                    for i, chunk in enumerate(chunks) if chunk.size
                ]
                for fut in futures:
                    totals += np.array(fut.result(), dtype=np.int64)
            start = stop
    finally:
        if pool is not None:
            pool.shutdown()

    frames, frame_errors, undetected, bit_errors, iters = (int(x) for x in totals)
    fer = frame_errors / frames
    lo, hi = wilson_interval(frame_errors, frames)
    return SimResult(
        point=point,
        method=cfg.method,
        ratio=cfg.ratio if cfg.method == "constant_ratio" else None,
        reads=cfg.reads,
        mi_bits=mi,
        thresholds=wl.thresholds,
        frames=frames,
        frame_errors=frame_errors,
        undetected_errors=undetected,
        bit_errors=bit_errors,
        fer=fer,
        ber=bit_errors / (frames * code.k),
        fer_ci_lo=lo,
        fer_ci_hi=hi,
        mean_iterations=iters / frames,
    )


def run_sweep(code: LdpcCode, cfg: SimConfig, points, progress=None) -> list[SimResult]:
    """Simulate every operating point, ordered by the sweep axis.

    `progress(index, total, result)` is invoked as each point completes.
    """
    pts = sorted(points, key=lambda p: p.axis_value)
    if not pts:
        raise ConfigError("sweep needs at least one operating point")
    results = []
    for i, p in enumerate(pts):
        res = run_point(code, cfg, p, point_key=i)
        if progress is not None:
            progress(i, len(pts), res)
        results.append(res)
    return results
