"""Threshold-voltage distributions of multi-level flash cells.

Each stored level is modeled by a conditional distribution over the cell's
threshold voltage. Two families are supported: plain Gaussian, and a
flat-center distribution with half-Gaussian tails attached at each end of a
uniform central region (both tails share one sigma). A retention surrogate
maps storage time to a drifted/widened model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Retention surrogate is only calibrated on this time range (months).
RETENTION_T_MAX = 120.0


@dataclass(frozen=True)
class Gaussian:
    """Normal threshold-voltage distribution (volts)."""

    mean: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not (math.isfinite(self.mean) and math.isfinite(self.sigma)):
            raise ValueError("mean and sigma must be finite")

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        z = (v - self.mean) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI)

    def cdf(self, v):
        # erfc-based form keeps relative accuracy in the far tails
        v = np.asarray(v, dtype=float)
        z = (v - self.mean) / (self.sigma * _SQRT2)
        return 0.5 * erfc(-z)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, self.sigma, size=size)


@dataclass(frozen=True)
class GaussianTailsUniformCenter:
    """Uniform density on [center_lo, center_hi] with half-Gaussian tails.

    The tails attach continuously at the edges of the flat region and share
    one sigma, so total mass is 1/(width + sigma*sqrt(2*pi)) analytically.
    """

    center_lo: float
    center_hi: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.center_lo > self.center_hi:
            raise ValueError("center_lo must be <= center_hi")
        if not all(map(math.isfinite, (self.center_lo, self.center_hi, self.sigma))):
            raise ValueError("parameters must be finite")

    @property
    def mean(self) -> float:
        return 0.5 * (self.center_lo + self.center_hi)

    @property
    def _height(self) -> float:
        width = self.center_hi - self.center_lo
        return 1.0 / (width + self.sigma * _SQRT2PI)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        h = self._height
        out = np.full_like(v, h, dtype=float)
        lo_mask = v < self.center_lo
        hi_mask = v > self.center_hi
        zlo = (v - self.center_lo) / self.sigma
        zhi = (v - self.center_hi) / self.sigma
        out = np.where(lo_mask, h * np.exp(-0.5 * zlo * zlo), out)
        out = np.where(hi_mask, h * np.exp(-0.5 * zhi * zhi), out)
        return out

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        h = self._height
        tail_mass = h * self.sigma * _SQRT2PI  # both tails together
        width = self.center_hi - self.center_lo
        zlo = (v - self.center_lo) / (self.sigma * _SQRT2)
        zhi = (v - self.center_hi) / (self.sigma * _SQRT2)
        below = tail_mass * 0.5 * erfc(-zlo)
        inside = 0.5 * tail_mass + h * (v - self.center_lo)
        above = 0.5 * tail_mass + h * width + tail_mass * (0.5 - 0.5 * erfc(zhi))
        out = np.where(v < self.center_lo, below, np.where(v <= self.center_hi, inside, above))
        return out

    def sample(self, rng: np.random.Generator, size=None):
        scalar = size is None
        n = 1 if scalar else int(np.prod(size))
        h = self._height
        p_center = h * (self.center_hi - self.center_lo)
        p_tail = 0.5 * h * self.sigma * _SQRT2PI  # each tail
        u = rng.random(n)
        out = np.empty(n, dtype=float)
        left = u < p_tail
        right = u >= p_tail + p_center
        center = ~(left | right)
        nl, nr = int(left.sum()), int(right.sum())
        out[left] = self.center_lo - np.abs(rng.normal(0.0, self.sigma, nl))
        out[right] = self.center_hi + np.abs(rng.normal(0.0, self.sigma, nr))
        out[center] = rng.uniform(self.center_lo, self.center_hi, int(center.sum()))
        if scalar:
            return float(out[0])
        return out.reshape(size)


LevelDistribution = Gaussian | GaussianTailsUniformCenter


def _level_mean(dist: LevelDistribution) -> float:
    return float(dist.mean)


@dataclass(frozen=True)
class FlashChannelModel:
    """Ordered per-level threshold-voltage distributions of one cell."""

    levels: tuple[LevelDistribution, ...]

    def __init__(self, levels):
        object.__setattr__(self, "levels", tuple(levels))
        if self.num_levels < 2:
            raise ValueError("need at least 2 levels")
        means = self.level_means
        if not np.all(np.diff(means) > 0):
            raise ValueError(f"level means must be strictly increasing, got {means}")

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def level_means(self) -> np.ndarray:
        return np.array([_level_mean(d) for d in self.levels])

    def _check_level(self, level: int):
        if not (0 <= level < self.num_levels):
            raise IndexError(f"level {level} out of range [0, {self.num_levels})")

    def support(self, tail_sigmas: float = 8.0) -> tuple[float, float]:
        """Voltage interval holding all but ~erfc(tail_sigmas/sqrt(2)) of every level's mass."""
        lo = math.inf
        hi = -math.inf
        for d in self.levels:
            if isinstance(d, Gaussian):
                lo = min(lo, d.mean - tail_sigmas * d.sigma)
                hi = max(hi, d.mean + tail_sigmas * d.sigma)
            else:
                lo = min(lo, d.center_lo - tail_sigmas * d.sigma)
                hi = max(hi, d.center_hi + tail_sigmas * d.sigma)
        return lo, hi


def pdf_eval(model: FlashChannelModel, level: int, v):
    """Density f_level(v) in 1/volts."""
    model._check_level(level)
    return model.levels[level].pdf(v)


def cdf_eval(model: FlashChannelModel, level: int, v):
    """P(threshold voltage of `level` <= v)."""
    model._check_level(level)
    return model.levels[level].cdf(v)


def sample(model: FlashChannelModel, level: int, rng: np.random.Generator, size=None):
    """Draw threshold voltages for cells written to `level`."""
    model._check_level(level)
    return model.levels[level].sample(rng, size=size)


@dataclass(frozen=True)
class RetentionParams:
    """Surrogate retention model: log-in-time mean drift and sigma growth.

    mean_i(t) = mean_i(0) - a_i * ln(1 + t/t0)
    sigma_i(t) = sigma_i(0) + b_i * ln(1 + t/t0)

    Coefficients are illustrative defaults, not measured device data.
    """

    means0: tuple[float, ...]
    sigmas0: tuple[float, ...]
    a: tuple[float, ...]  # volts per log-month, mean drift (downward)
    b: tuple[float, ...]  # volts per log-month, sigma growth
    t0: float = 1.0  # months

    def __post_init__(self):
        n = len(self.means0)
        if not (len(self.sigmas0) == len(self.a) == len(self.b) == n):
            raise ValueError("means0, sigmas0, a, b must have equal length")
        if n < 2:
            raise ValueError("need at least 2 levels")
        if any(x < 0 for x in self.a) or any(x < 0 for x in self.b):
            raise ValueError("drift coefficients must be >= 0")
        if any(s <= 0 for s in self.sigmas0):
            raise ValueError("initial sigmas must be > 0")
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if not all(m1 < m2 for m1, m2 in zip(self.means0, self.means0[1:])):
            raise ValueError("initial means must be strictly increasing")
        # erased level must dominate in spread over the whole supported range
        g = math.log(1.0 + RETENTION_T_MAX / self.t0)
        s_end = [s + bi * g for s, bi in zip(self.sigmas0, self.b)]
        if any(s_end[0] < s for s in s_end[1:]) or any(self.sigmas0[0] < s for s in self.sigmas0[1:]):
            raise ValueError("level 0 must have the largest sigma over the supported range")
        # means must stay ordered out to the end of the supported range
        m_end = [m - ai * g for m, ai in zip(self.means0, self.a)]
        if not all(m1 < m2 for m1, m2 in zip(m_end, m_end[1:])):
            raise ValueError("mean drift collapses level ordering before t=120 months")


def retention_model(params: RetentionParams, t: float) -> FlashChannelModel:
    """Channel model after t months of storage, per the surrogate drift law."""
    if t < 0 or t > RETENTION_T_MAX:
        raise ValueError(f"t={t} outside supported range [0, {RETENTION_T_MAX}] months")
    g = math.log(1.0 + t / params.t0)
    levels = [
        Gaussian(m - ai * g, s + bi * g)
        for m, s, ai, bi in zip(params.means0, params.sigmas0, params.a, params.b)
    ]
    return FlashChannelModel(levels)


def default_retention_params() -> RetentionParams:
    """Illustrative 4-level surrogate: wide erased level, narrow charged levels.

    Shipped for examples and tests only; coefficients are not device ground
    truth. The same values live in configs/retention_default.ini.
    """
    return RetentionParams(
        means0=(1.0, 2.6, 3.3, 4.0),
        sigmas0=(0.35, 0.09, 0.09, 0.09),
        a=(0.0, 0.030, 0.045, 0.060),
        b=(0.040, 0.010, 0.012, 0.015),
        t0=1.0,
    )


def gaussian_model(means, sigmas) -> FlashChannelModel:
    """Convenience: model with one Gaussian per level."""
    return FlashChannelModel([Gaussian(m, s) for m, s in zip(means, sigmas)])


# family codes used by the numba kernels in _kernels.py
FAMILY_GAUSSIAN = 0
FAMILY_GTUC = 1


def pack_params(model: FlashChannelModel):
    """Flatten a model into (family, p1, p2, p3) arrays for the jit kernels.

    Gaussian: p1=mean, p2=sigma. Flat-center: p1=center_lo, p2=sigma,
    p3=center_hi.
    """
    n = model.num_levels
    family = np.zeros(n, dtype=np.int64)
    p1 = np.zeros(n)
    p2 = np.zeros(n)
    p3 = np.zeros(n)
    for i, d in enumerate(model.levels):
        if isinstance(d, Gaussian):
            family[i] = FAMILY_GAUSSIAN
            p1[i], p2[i] = d.mean, d.sigma
        else:
            family[i] = FAMILY_GTUC
            p1[i], p2[i], p3[i] = d.center_lo, d.sigma, d.center_hi
    return family, p1, p2, p3
