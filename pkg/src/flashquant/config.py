"""INI-style configuration shared by all CLI subcommands.

One file format everywhere: named sections of key = value pairs, with one
[level.K] section per cell level. Unknown sections or keys are hard errors
so typos surface immediately. See configs/ in the repository root for
annotated examples and docs/config.md for the full key reference.
"""

from __future__ import annotations

import configparser
import re

from .channel import (
    FlashChannelModel,
    Gaussian,
    GaussianTailsUniformCenter,
    RetentionParams,
)
from .errors import ConfigError

_LEVEL_RE = re.compile(r"^level\.(\d+)$")

SCHEMA: dict[str, set[str]] = {
    "model": {"source", "levels"},
    "level": {"family", "mean", "sigma", "center_lo", "center_hi"},
    "retention": {"a", "b", "t0"},
    "quantize": {
        "reads", "methods", "ratios", "t_months", "sigma_scale",
        "multistarts", "seed", "bracket_lo", "bracket_hi", "matrix_out",
    },
    "code": {"n", "k", "preset", "dd_file", "ace_depth", "ace_eta", "seed"},
    "sim": {
        "code_file", "reads", "method", "ratio", "voltages", "trials",
        "max_iters", "stop_frame_errors", "seed", "threads", "algorithm",
    },
    "sweep": {"axis", "values", "t_months", "sigma_scale"},
}


def _section_kind(name: str) -> str:
    if _LEVEL_RE.match(name):
        return "level"
    return name


def load_config(path) -> dict[str, dict[str, str]]:
    """Parse and schema-check a config file into {section: {key: raw string}}."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg: dict[str, dict[str, str]] = {}
    for section in cp.sections():
        kind = _section_kind(section)
        if kind not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[kind]:
                raise ConfigError(f"{path}: unknown key {key!r} in section [{section}]")
        cfg[section] = dict(cp[section])
    return cfg


def apply_overrides(cfg: dict[str, dict[str, str]], overrides) -> None:
    """Apply CLI --set section.key=value entries; keys must exist in the schema."""
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError(f"override target {target!r} is not of the form section.key")
        section, key = target.rsplit(".", 1)
        kind = _section_kind(section)
        if kind not in SCHEMA or key not in SCHEMA[kind]:
            raise ConfigError(f"override references unknown key {section}.{key}")
        cfg.setdefault(section, {})[key] = value


def _convert(section: str, key: str, raw: str, conv, what: str):
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected {what}") from exc


def get_str(cfg, section, key, default=None):
    raw = cfg.get(section, {}).get(key, "").strip()
    if not raw:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    return raw


def get_opt_str(cfg, section, key):
    raw = cfg.get(section, {}).get(key, "").strip()
    return raw or None


def get_int(cfg, section, key, default=None):
    raw = cfg.get(section, {}).get(key, "").strip()
    if not raw:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    return _convert(section, key, raw, int, "an integer")


def get_float(cfg, section, key, default=None):
    raw = cfg.get(section, {}).get(key, "").strip()
    if not raw:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    return _convert(section, key, raw, float, "a number")


def get_float_list(cfg, section, key, default=None):
    raw = cfg.get(section, {}).get(key, "").strip()
    if not raw:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    return _convert(
        section, key, raw,
        lambda s: [float(x) for x in s.replace(",", " ").split()],
        "a comma or space separated list of numbers",
    )


def get_str_list(cfg, section, key, default=None):
    raw = cfg.get(section, {}).get(key, "").strip()
    if not raw:
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default
    return [x.strip() for x in raw.split(",") if x.strip()]


def _level_sections(cfg) -> list[tuple[int, dict[str, str]]]:
    found = []
    for name, sec in cfg.items():
        match = _LEVEL_RE.match(name)
        if match:
            found.append((int(match.group(1)), sec))
    return sorted(found)


def _level_distribution(index: int, sec: dict[str, str]):
    section = f"level.{index}"
    family = sec.get("family", "gaussian").strip().lower()
    sigma = _convert(section, "sigma", sec.get("sigma", ""), float, "a number")
    if family == "gaussian":
        mean = _convert(section, "mean", sec.get("mean", ""), float, "a number")
        return Gaussian(mean, sigma)
    if family == "gaussian_tails_uniform_center":
        lo = _convert(section, "center_lo", sec.get("center_lo", ""), float, "a number")
        hi = _convert(section, "center_hi", sec.get("center_hi", ""), float, "a number")
        return GaussianTailsUniformCenter(lo, hi, sigma)
    raise ConfigError(f"[{section}] unknown family {family!r}")


def model_source_from_config(cfg) -> tuple[FlashChannelModel | None, RetentionParams | None]:
    """Build the channel source: (gaussian model, None) or (None, retention params)."""
    source = get_str(cfg, "model", "source")
    declared = get_int(cfg, "model", "levels")
    levels = _level_sections(cfg)
    if len(levels) != declared:
        raise ConfigError(f"[model] declares {declared} levels but {len(levels)} level sections found")
    if [i for i, _ in levels] != list(range(declared)):
        raise ConfigError("level sections must be level.0 .. level.N-1 without gaps")
    if source == "gaussian":
        try:
            model = FlashChannelModel([_level_distribution(i, s) for i, s in levels])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return model, None
    if source == "retention":
        means, sigmas = [], []
        for i, sec in levels:
            dist = _level_distribution(i, sec)
            if not isinstance(dist, Gaussian):
                raise ConfigError("retention source supports gaussian levels only")
            means.append(dist.mean)
            sigmas.append(dist.sigma)
        a = get_float_list(cfg, "retention", "a")
        b = get_float_list(cfg, "retention", "b")
        t0 = get_float(cfg, "retention", "t0", 1.0)
        if len(a) != declared or len(b) != declared:
            raise ConfigError(f"[retention] a and b must list {declared} coefficients")
        try:
            params = RetentionParams(tuple(means), tuple(sigmas), tuple(a), tuple(b), t0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return None, params
    raise ConfigError(f"[model] source must be gaussian or retention, got {source!r}")
