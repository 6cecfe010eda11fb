"""Gray labeling of cell levels and LLR demapping of quantized reads."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantize import TransitionMatrix

# Natural-log LLR saturation; e^30 exceeds any probability ratio that a
# desk-scale transition matrix can represent, so decisions are unaffected.
LLR_MAX = 30.0


@dataclass(frozen=True)
class GrayLabeling:
    """level -> bit-string table where adjacent levels differ in one bit."""

    level_to_bits: tuple[str, ...]

    def __init__(self, level_to_bits):
        labels = tuple(level_to_bits)
        n = len(labels)
        width = n.bit_length() - 1
        if n < 2 or (1 << width) != n:
            raise ValueError(f"number of levels must be a power of two, got {n}")
        if any(len(s) != width or set(s) - {"0", "1"} for s in labels):
            raise ValueError(f"labels must be {width}-bit strings")
        if len(set(labels)) != n:
            raise ValueError("labels must be distinct")
        for a, b in zip(labels, labels[1:]):
            if sum(x != y for x, y in zip(a, b)) != 1:
                raise ValueError(f"adjacent labels {a!r}, {b!r} differ in more than one bit")
        object.__setattr__(self, "level_to_bits", labels)

    @classmethod
    def reflected(cls, num_levels: int) -> "GrayLabeling":
        """Binary-reflected code; for 4 levels this is (00, 01, 11, 10)."""
        width = num_levels.bit_length() - 1
        labels = [format(i ^ (i >> 1), f"0{width}b") for i in range(num_levels)]
        return cls(labels)

    @property
    def num_levels(self) -> int:
        return len(self.level_to_bits)

    @property
    def bits_per_level(self) -> int:
        return len(self.level_to_bits[0])

    def bits_of(self, level: int) -> str:
        if not (0 <= level < self.num_levels):
            raise IndexError(f"level {level} out of range [0, {self.num_levels})")
        return self.level_to_bits[level]

    def level_of(self, bits: str) -> int:
        try:
            return self.level_to_bits.index(bits)
        except ValueError:
            raise KeyError(f"no level labeled {bits!r}") from None

    def bit_array(self) -> np.ndarray:
        """(num_levels, bits_per_level) 0/1 array, bit 0 first."""
        return np.array([[int(c) for c in s] for s in self.level_to_bits], dtype=np.int8)


def level_to_bits(lab: GrayLabeling, level: int) -> str:
    return lab.bits_of(level)


def bits_to_level(lab: GrayLabeling, bits: str) -> int:
    return lab.level_of(bits)


def bit_llrs(T: TransitionMatrix, lab: GrayLabeling, y: int) -> np.ndarray:
    """Per-bit LLRs ln(P(bit=0|y)/P(bit=1|y)) under a uniform level prior.

    Saturated to +-LLR_MAX; a region no level can reach is an error.
    """
    if lab.num_levels != T.num_inputs:
        raise ValueError(f"labeling has {lab.num_levels} levels but channel has {T.num_inputs} inputs")
    if not (0 <= y < T.num_outputs):
        raise IndexError(f"output index {y} out of range [0, {T.num_outputs})")
    col = T.probs[:, y]
    if not np.any(col > 0.0):
        raise ValueError(f"output region {y} is unreachable (all-zero probability column)")
    bits = lab.bit_array()
    out = np.empty(lab.bits_per_level)
    for k in range(lab.bits_per_level):
        p0 = float(col[bits[:, k] == 0].sum())
        p1 = float(col[bits[:, k] == 1].sum())
        if p0 == 0.0:
            out[k] = -LLR_MAX
        elif p1 == 0.0:
            out[k] = LLR_MAX
        else:
            out[k] = min(LLR_MAX, max(-LLR_MAX, math.log(p0 / p1)))
    return out


def llr_table(T: TransitionMatrix, lab: GrayLabeling) -> np.ndarray:
    """(num_outputs, bits_per_level) LLR lookup for the whole channel."""
    return np.stack([bit_llrs(T, lab, y) for y in range(T.num_outputs)])
