"""LDPC degree distributions (node perspective) and the quantized-channel tweak."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

from ..errors import ConfigError

RATE_TOL = 0.005
SUM_TOL = 1e-9


@dataclass(frozen=True)
class DegreeDistribution:
    """Node-perspective degree fractions for variable and check sides."""

    variable_node_fractions: dict[int, float]
    check_node_fractions: dict[int, float]
    design_rate: float

    def __post_init__(self):
        for name, frac in (
            ("variable", self.variable_node_fractions),
            ("check", self.check_node_fractions),
        ):
            if not frac:
                raise ValueError(f"{name} fractions are empty")
            if any(d < 2 or d != int(d) for d in frac):
                raise ValueError(f"{name} degrees must be integers >= 2")
            if any(f < 0 for f in frac.values()):
                raise ValueError(f"{name} fractions must be nonnegative")
            total = sum(frac.values())
            if abs(total - 1.0) > SUM_TOL:
                raise ValueError(f"{name} fractions sum to {total}, expected 1 within {SUM_TOL}")
        if not (0.0 < self.design_rate < 1.0):
            raise ValueError(f"design_rate must be in (0,1), got {self.design_rate}")
        implied = 1.0 - self.avg_variable_degree / self.avg_check_degree
        if abs(implied - self.design_rate) > RATE_TOL:
            raise ValueError(
                f"implied rate {implied:.4f} deviates from design rate {self.design_rate:.4f} "
                f"by more than {RATE_TOL}"
            )

    @property
    def avg_variable_degree(self) -> float:
        return sum(d * f for d, f in self.variable_node_fractions.items())

    @property
    def avg_check_degree(self) -> float:
        return sum(d * f for d, f in self.check_node_fractions.items())

    @property
    def max_variable_degree(self) -> int:
        return max(d for d, f in self.variable_node_fractions.items() if f > 0)

    def edge_perspective_variable(self) -> dict[int, float]:
        """Edge fractions lambda_d proportional to d * v_d."""
        avg = self.avg_variable_degree
        return {d: d * f / avg for d, f in self.variable_node_fractions.items() if f > 0}

    def edge_perspective_check(self) -> dict[int, float]:
        avg = self.avg_check_degree
        return {d: d * f / avg for d, f in self.check_node_fractions.items() if f > 0}


def adjust_for_quantization(dd: DegreeDistribution) -> DegreeDistribution:
    """Move every degree-3 variable node to degree 4; keep the rest in place.

    The check side is shifted by a uniform per-degree increment (fractionally
    split between the two nearest integers) so the edge counts implied by both
    perspectives stay consistent at the same design rate.
    """
    v3 = dd.variable_node_fractions.get(3, 0.0)
    if v3 == 0.0:
        return dd
    var = {d: f for d, f in dd.variable_node_fractions.items() if d != 3}
    var[4] = var.get(4, 0.0) + v3
    new_avg_var = sum(d * f for d, f in var.items())
    new_avg_chk = new_avg_var / (1.0 - dd.design_rate)
    delta = new_avg_chk - dd.avg_check_degree
    base = math.floor(delta)
    frac = delta - base
    chk: dict[int, float] = {}
    for d, f in dd.check_node_fractions.items():
        if f == 0.0:
            continue
        chk[d + base] = chk.get(d + base, 0.0) + f * (1.0 - frac)
        if frac > 0.0:
            chk[d + base + 1] = chk.get(d + base + 1, 0.0) + f * frac
    return DegreeDistribution(var, chk, dd.design_rate)


_SECTION_META = "degree_distribution"
_SECTION_VAR = "variable_nodes"
_SECTION_CHK = "check_nodes"


def _parse_dd(cp: configparser.ConfigParser, source: str) -> DegreeDistribution:
    for sec in (_SECTION_META, _SECTION_VAR, _SECTION_CHK):
        if sec not in cp:
            raise ConfigError(f"{source}: missing [{sec}] section")
    try:
        rate = float(cp[_SECTION_META]["design_rate"])
        var = {int(d): float(f) for d, f in cp[_SECTION_VAR].items()}
        chk = {int(d): float(f) for d, f in cp[_SECTION_CHK].items()}
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{source}: bad degree distribution entry: {exc}") from exc
    try:
        return DegreeDistribution(var, chk, rate)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_degree_distribution(path) -> DegreeDistribution:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if not cp.read(path):
        raise ConfigError(f"cannot read degree distribution file {path}")
    return _parse_dd(cp, str(path))


def save_degree_distribution(dd: DegreeDistribution, path) -> None:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp[_SECTION_META] = {"design_rate": repr(dd.design_rate)}
    cp[_SECTION_VAR] = {str(d): repr(f) for d, f in sorted(dd.variable_node_fractions.items())}
    cp[_SECTION_CHK] = {str(d): repr(f) for d, f in sorted(dd.check_node_fractions.items())}
    with open(path, "w") as fh:
        cp.write(fh)


PRESET_NAMES = (
    "code1_awgn_maxdeg19",
    "code2_quantization_adjusted",
    "code3_awgn_maxdeg24",
)


def load_preset(name: str) -> DegreeDistribution:
    """Load one of the shipped distribution presets by name."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    ref = resources.files("flashquant.presets").joinpath(f"{name}.ini")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(ref.read_text())
    return _parse_dd(cp, f"preset:{name}")
