"""Command-line front end: quantize, compare-mi, construct, simulate.

Every subcommand reads one config file (see config.py), takes the same
override flags, and writes CSV or alist artifacts atomically (temp file then
rename). Exit codes: 0 success, 2 config error, 3 numerical failure,
4 construction failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import config as cfgmod
from .channel import retention_model
from .errors import ConfigError, ConstructionError, NumericalError
from .ldpc import (
    construct_peg_ace,
    load_alist,
    load_degree_distribution,
    load_preset,
    save_alist,
)
from .mapping import GrayLabeling
from .quantize import (
    SearchConfig,
    build_transition_matrix,
    constant_ratio_thresholds,
    hard_thresholds,
    mutual_information,
    optimize_mmi,
    save_matrix_txt,
)
from .sim import OperatingPoint, SimConfig, run_sweep

_FMT = "%.17g"  # voltages, MI, rates: full double precision, locale-free


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    return _FMT % x


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(rows) -> str:
    return "\n".join(",".join(row) for row in rows) + "\n"


def _model_at(cfg, t_months: float | None, sigma_scale: float):
    gaussian, retention = cfgmod.model_source_from_config(cfg)
    if retention is not None:
        if t_months is None or np.isnan(t_months):
            raise ConfigError("retention model requires a t_months value")
        model = retention_model(retention, t_months)
    else:
        model = gaussian
    if sigma_scale != 1.0:
        from .sim import _scale_sigmas

        model = _scale_sigmas(model, sigma_scale)
    return model


def _quantize_rows(cfg, seed_override):
    model = _model_at(
        cfg,
        cfgmod.get_float(cfg, "quantize", "t_months", float("nan")),
        cfgmod.get_float(cfg, "quantize", "sigma_scale", 1.0),
    )
    t_months = cfgmod.get_float(cfg, "quantize", "t_months", float("nan"))
    reads = cfgmod.get_int(cfg, "quantize", "reads")
    if reads < 1:
        raise ConfigError("quantize.reads must be >= 1")
    methods = cfgmod.get_str_list(cfg, "quantize", "methods", ["mmi"])
    ratios = cfgmod.get_float_list(cfg, "quantize", "ratios", [])
    seed = seed_override if seed_override is not None else cfgmod.get_int(cfg, "quantize", "seed", 0)
    lo = cfgmod.get_float(cfg, "quantize", "bracket_lo", float("nan"))
    hi = cfgmod.get_float(cfg, "quantize", "bracket_hi", float("nan"))
    bracket = None if (np.isnan(lo) or np.isnan(hi)) else (lo, hi)
    search = SearchConfig(
        bracket=bracket,
        multistarts=cfgmod.get_int(cfg, "quantize", "multistarts", 8),
        seed=seed,
    )
    n = model.num_levels
    rows = []
    mmi_matrix = None
    for method in methods:
        if method == "mmi":
            res = optimize_mmi(model, reads, search)
            if not res.converged:
                print("warning: MMI search hit the sweep cap before converging", file=sys.stderr)
            wl, mi = res.voltages, res.mi_bits
            mmi_matrix = build_transition_matrix(model, wl)
            rows.append(("mmi", None, wl, mi))
        elif method == "hard":
            wl = hard_thresholds(model)
            rows.append(("hard", None, wl, mutual_information(build_transition_matrix(model, wl))))
        elif method == "constant_ratio":
            if not ratios:
                raise ConfigError("constant_ratio in quantize.methods needs quantize.ratios")
            m_cr = reads if reads in (n - 1, 2 * (n - 1)) else 2 * (n - 1)
            for r in ratios:
                wl = constant_ratio_thresholds(model, r, m_cr)
                rows.append(
                    ("constant_ratio", r, wl, mutual_information(build_transition_matrix(model, wl))))
        else:
            raise ConfigError(f"unknown quantize method {method!r}")
    max_m = max(len(wl) for _, _, wl, _ in rows)
    header = ["method", "R", "M", "t_months"] + [f"q_{i + 1}" for i in range(max_m)] + ["mi_bits"]
    out = [header]
    for method, r, wl, mi in rows:
        qcols = [_fmt(q) for q in wl.thresholds] + [""] * (max_m - len(wl))
        out.append(
            [method, _fmt(r), str(len(wl)), _fmt(t_months) if not np.isnan(t_months) else ""]
            + qcols + [_fmt(mi)])
    matrix_out = cfgmod.get_opt_str(cfg, "quantize", "matrix_out")
    if matrix_out and mmi_matrix is not None:
        save_matrix_txt(mmi_matrix, matrix_out)
    return out


def cmd_quantize(args) -> int:
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.set)
    rows = _quantize_rows(cfg, args.seed)
    _atomic_write(args.out, _csv(rows))
    return 0


def cmd_compare_mi(args) -> int:
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.set)
    axis = cfgmod.get_str(cfg, "sweep", "axis", "t_months")
    values = cfgmod.get_float_list(cfg, "sweep", "values")
    reads = cfgmod.get_int(cfg, "quantize", "reads")
    ratios = cfgmod.get_float_list(cfg, "quantize", "ratios", [])
    seed = args.seed if args.seed is not None else cfgmod.get_int(cfg, "quantize", "seed", 0)
    fixed_t = cfgmod.get_float(cfg, "sweep", "t_months", float("nan"))
    fixed_scale = cfgmod.get_float(cfg, "sweep", "sigma_scale", 1.0)
    rows = [["method", "R", "M", axis, "mi_bits"]]
    for value in values:
        if axis == "t_months":
            t, scale = value, fixed_scale
        elif axis == "sigma_scale":
            t, scale = (None if np.isnan(fixed_t) else fixed_t), value
        else:
            raise ConfigError(f"sweep.axis must be t_months or sigma_scale, got {axis!r}")
        model = _model_at(cfg, t, scale)
        n = model.num_levels
        res = optimize_mmi(model, reads, SearchConfig(seed=seed))
        rows.append(["mmi", "", str(reads), _fmt(value), _fmt(res.mi_bits)])
        wl = hard_thresholds(model)
        rows.append(["hard", "", str(n - 1), _fmt(value),
                     _fmt(mutual_information(build_transition_matrix(model, wl)))])
        m_cr = reads if reads in (n - 1, 2 * (n - 1)) else 2 * (n - 1)
        for r in ratios:
            wl = constant_ratio_thresholds(model, r, m_cr)
            rows.append(["constant_ratio", _fmt(r), str(m_cr), _fmt(value),
                         _fmt(mutual_information(build_transition_matrix(model, wl)))])
    _atomic_write(args.out, _csv(rows))
    return 0


def _load_dd(cfg):
    preset = cfgmod.get_opt_str(cfg, "code", "preset")
    dd_file = cfgmod.get_opt_str(cfg, "code", "dd_file")
    if bool(preset) == bool(dd_file):
        raise ConfigError("exactly one of code.preset / code.dd_file is required")
    return load_preset(preset) if preset else load_degree_distribution(dd_file)


def cmd_construct(args) -> int:
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.set)
    n = cfgmod.get_int(cfg, "code", "n")
    k = cfgmod.get_int(cfg, "code", "k")
    if n % 2:
        raise ConfigError(f"code.n must be even (two bits per cell), got {n}")
    dd = _load_dd(cfg)
    seed = args.seed if args.seed is not None else cfgmod.get_int(cfg, "code", "seed", 0)
    ace_depth = cfgmod.get_int(cfg, "code", "ace_depth", 0) or None
    ace_eta = cfgmod.get_int(cfg, "code", "ace_eta", 4)
    code = construct_peg_ace(dd, n, k, ace_depth=ace_depth, ace_eta=ace_eta, seed=seed)
    save_alist(code, args.out)
    meta = code.meta
    report = [
        f"n {n} k {k} rate {_fmt(k / n)}",
        f"girth {meta['girth']}",
        f"ace_depth {meta['ace_depth']} ace_eta {meta['ace_eta']} "
        f"min_detected_ace {meta['min_detected_ace']}",
        f"attempts {meta['attempts']} seed {meta['seed']}",
        f"column_degree_counts {meta['column_degree_counts']}",
        f"column_degree_deviation "
        + " ".join(f"{d}:{v:.3f}" for d, v in sorted(meta["column_degree_deviation"].items())),
        f"check_degree_histogram {meta['check_degree_histogram']}",
    ]
    print("\n".join(report))
    return 0


def _sim_config(cfg, seed_override, threads_override) -> SimConfig:
    gaussian, retention = cfgmod.model_source_from_config(cfg)
    method = cfgmod.get_str(cfg, "sim", "method")
    voltages = cfgmod.get_float_list(cfg, "sim", "voltages", [])
    seed = seed_override if seed_override is not None else cfgmod.get_int(cfg, "sim", "seed", 0)
    threads = threads_override if threads_override else cfgmod.get_int(cfg, "sim", "threads", 1)
    return SimConfig(
        reads=cfgmod.get_int(cfg, "sim", "reads"),
        method=method,
        gaussian=gaussian,
        retention=retention,
        ratio=cfgmod.get_float(cfg, "sim", "ratio", float("nan"))
        if method == "constant_ratio" else None,
        voltages=tuple(voltages) if voltages else None,
        trials=cfgmod.get_int(cfg, "sim", "trials", 20000),
        max_iters=cfgmod.get_int(cfg, "sim", "max_iters", 50),
        seed=seed,
        stop_frame_errors=cfgmod.get_int(cfg, "sim", "stop_frame_errors", 100),
        algorithm=cfgmod.get_str(cfg, "sim", "algorithm", "sum_product"),
        threads=threads,
        search=SearchConfig(seed=seed),
    )


def _sweep_points(cfg) -> list[OperatingPoint]:
    axis = cfgmod.get_str(cfg, "sweep", "axis", "t_months")
    values = cfgmod.get_float_list(cfg, "sweep", "values")
    fixed_t = cfgmod.get_float(cfg, "sweep", "t_months", float("nan"))
    fixed_scale = cfgmod.get_float(cfg, "sweep", "sigma_scale", 1.0)
    points = []
    for v in values:
        if axis == "t_months":
            points.append(OperatingPoint(t_months=v, sigma_scale=fixed_scale))
        elif axis == "sigma_scale":
            points.append(OperatingPoint(
                t_months=None if np.isnan(fixed_t) else fixed_t, sigma_scale=v))
        else:
            raise ConfigError(f"sweep.axis must be t_months or sigma_scale, got {axis!r}")
    return points


def cmd_simulate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.set)
    code_file = cfgmod.get_opt_str(cfg, "sim", "code_file")
    if code_file:
        code = load_alist(code_file)
    else:
        n = cfgmod.get_int(cfg, "code", "n")
        k = cfgmod.get_int(cfg, "code", "k")
        dd = _load_dd(cfg)
        code = construct_peg_ace(
            dd, n, k,
            ace_depth=cfgmod.get_int(cfg, "code", "ace_depth", 0) or None,
            ace_eta=cfgmod.get_int(cfg, "code", "ace_eta", 4),
            seed=cfgmod.get_int(cfg, "code", "seed", 0),
        )
    if code.n % 2:
        raise ConfigError(f"code block length {code.n} is odd; two bits map to each cell")
    sim_cfg = _sim_config(cfg, args.seed, args.threads)
    points = _sweep_points(cfg)
    axis = cfgmod.get_str(cfg, "sweep", "axis", "t_months")
    print(f"simulating {len(points)} points, {sim_cfg.trials} trials cap each", file=sys.stderr)

    def report(i, total, res):
        print(
            f"point {i + 1}/{total} {axis}={res.point.axis_value:g} "
            f"fer={res.fer:.3g} ({res.frame_errors}/{res.frames})",
            file=sys.stderr, flush=True)

    results = run_sweep(code, sim_cfg, points, progress=report)
    rows = [[
        "point_id", "method", "R", "M", axis, "mi_bits", "frames", "frame_errors",
        "fer", "fer_ci_lo", "fer_ci_hi", "ber", "mean_iters",
    ]]
    for i, res in enumerate(results):
        rows.append([
            str(i), res.method, _fmt(res.ratio) if res.ratio is not None else "",
            str(res.reads), _fmt(res.point.axis_value), _fmt(res.mi_bits),
            str(res.frames), str(res.frame_errors), _fmt(res.fer),
            _fmt(res.fer_ci_lo), _fmt(res.fer_ci_hi), _fmt(res.ber),
            _fmt(res.mean_iterations),
        ])
    _atomic_write(args.out, _csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flashquant",
        description="Read-voltage quantization and LDPC simulation for MLC flash channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "quantize": (cmd_quantize, "thresholds and MI per quantization method"),
        "compare-mi": (cmd_compare_mi, "MI of every method across a sweep axis"),
        "construct": (cmd_construct, "build a parity-check matrix, write alist"),
        "simulate": (cmd_simulate, "Monte Carlo FER sweep, write CSV"),
    }
    for name, (fn, help_text) in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", required=True, help="output artifact path")
        p.add_argument("--seed", type=int, default=None, help="override config seeds")
        p.add_argument("--threads", type=int, default=0, help="worker threads (simulate)")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="config override, repeatable")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ConstructionError as exc:
        print(f"construction failure: {exc}", file=sys.stderr)
        return 4
    except (FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
