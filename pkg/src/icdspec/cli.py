"""Config-driven command line front end.

Subcommands: ``simulate`` (per-channel CSV grids + SVG heatmaps),
``pump-probe`` (late-time spectra and integrated yields over a quench-delay
scan, with lifetime fits), ``fit`` (oscillation-maxima lifetime fit of a
stored grid or trace), ``oracle-compare`` (closed form vs discretized-
continuum propagation with pass/fail thresholds).

Exit codes: 0 ok, 2 config error, 3 I/O error, 4 insufficient data,
5 threshold breach.
"""
from __future__ import annotations

import argparse
import math
import os
import sys as _sys

import numpy as np

from . import __version__
from .analysis import (
    InsufficientMaximaError,
    extract_maxima,
    fit_lifetime,
)
from .params import ConfigError, SimulationConfig, load_config
from .quench import population_n0
from .spectrum import (
    read_csv,
    simulate_grid,
    write_csv,
    write_frames,
    write_heatmap_svg,
)
from .units import fs_to_au

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_THRESHOLD = 5


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="icdspec",
        description="Time-resolved sRICD/ICD electron spectra and lifetime fits",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="config file (bundled neon-dimer defaults if omitted)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--override", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="config override (repeatable)")
        sp.add_argument("--workers", type=int, default=1, help="parallel grid workers")
        sp.add_argument("--seed", type=int, default=0,
                        help="reserved; echoed into metadata, unused by the physics")

    sp = sub.add_parser("simulate", help="write per-channel spectrum grids")
    common(sp)
    sp.add_argument("--frames", action="store_true",
                    help="also write one CSV per time step")

    sp = sub.add_parser("pump-probe", help="scan the quench delay t_s")
    common(sp)
    sp.add_argument("--ts", required=True,
                    help="comma-separated quench centers in fs, e.g. 15,25,35")
    sp.add_argument("--late-offset-fs", type=float, default=150.0,
                    help="detection time after each t_s for the late spectrum")

    sp = sub.add_parser("fit", help="lifetime fit of a stored trace or grid")
    common(sp)
    sp.add_argument("--input", required=True, help="spectrum CSV from simulate")
    sp.add_argument("--energy", type=float, required=True,
                    help="kinetic energy (eV) of the time trace")
    sp.add_argument("--omit", type=int, default=1,
                    help="leading maxima to omit from the fit")

    sp = sub.add_parser("oracle-compare",
                        help="closed form vs discretized-continuum propagation")
    common(sp)
    sp.add_argument("--n-bins", type=int, default=1500)
    sp.add_argument("--sricd-threshold", type=float, default=0.03)
    sp.add_argument("--icd-threshold", type=float, default=0.05)
    return p


def _load(args) -> SimulationConfig:
    return load_config(args.config, tuple(args.override))


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_simulate(args) -> int:
    config = _load(args)
    out = _ensure_out(args)
    grids = simulate_grid(config, workers=args.workers)
    for channel, grid in grids.items():
        grid.metadata["seed"] = str(args.seed)
        write_csv(grid, os.path.join(out, f"spectrum_{channel}.csv"))
        write_heatmap_svg(grid, os.path.join(out, f"spectrum_{channel}.svg"))
        if args.frames:
            write_frames(grid, os.path.join(out, "frames"), stem=channel)
        print(f"wrote {channel}: {len(grid.t_axis)} x {len(grid.e_axis)} grid")
    return EXIT_OK


def _integrated_yield(grid) -> float:
    return float(np.trapezoid(grid.values[-1], grid.e_axis))


def cmd_pump_probe(args) -> int:
    config = _load(args)
    out = _ensure_out(args)
    try:
        ts_list = [float(x) for x in args.ts.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --ts list: {exc}") from exc
    if not ts_list:
        raise ConfigError("--ts list is empty")
    rows = []
    reference = None
    for t_s in ts_list:
        overrides = tuple(args.override) + (
            f"quench.t_s_fs={t_s}",
            f"grid.t_max_fs={t_s + args.late_offset_fs}",
            f"grid.t_min_fs={t_s + args.late_offset_fs - 1.0}",
            "grid.dt_fs=1.0",
        )
        try:
            cfg = load_config(args.config, overrides)
            population_n0(cfg.system, cfg.pulse, cfg.quench)  # validates placement
        except (ConfigError, ValueError) as exc:
            print(f"skipping t_s = {t_s} fs: {exc}")
            continue
        unq_overrides = overrides + ("quench.enabled=false",)
        cfg_unq = load_config(args.config, unq_overrides)
        grids = simulate_grid(cfg, workers=args.workers)
        grids_unq = simulate_grid(cfg_unq, workers=args.workers)
        for channel, grid in grids.items():
            write_csv(grid, os.path.join(out, f"pump_probe_{channel}_ts{t_s:g}.csv"))
        icd_yield = _integrated_yield(grids["icd"])
        sricd_yield = _integrated_yield(grids["sricd"])
        sricd_ref = _integrated_yield(grids_unq["sricd"])
        rows.append((t_s, icd_yield, sricd_yield, sricd_ref - sricd_yield))
        reference = cfg
    if len(rows) == 0:
        print("no valid t_s entries")
        return EXIT_DATA
    path = os.path.join(out, "pump_probe_summary.csv")
    with open(path, "w") as fh:
        fh.write("# integrated late-time yields vs quench delay\n")
        fh.write("t_s_fs,icd_yield,sricd_yield,sricd_suppressed\n")
        for r in rows:
            fh.write(",".join(repr(float(x)) for x in r) + "\n")
    print(f"wrote {path} ({len(rows)} delays)")
    if len(rows) >= 3:
        arr = np.array(rows)
        tau_icd = fit_yield_lifetime(arr[:, 0], arr[:, 1])
        tau_sup = fit_yield_lifetime(arr[:, 0], arr[:, 3])
        print(f"ICD yield decay constant: {tau_icd:.2f} fs")
        print(f"suppressed sRICD decay constant: {tau_sup:.2f} fs")
        if reference is not None:
            print(f"effective lifetime (input parameters): "
                  f"{reference.system.tau_eff_fs:.2f} fs")
    return EXIT_OK


def fit_yield_lifetime(t_s_fs: np.ndarray, yields: np.ndarray) -> float:
    """Exponential decay constant of yield(t_s) by linear log fit."""
    good = yields > 0.0
    if np.sum(good) < 2:
        raise InsufficientMaximaError("need >= 2 positive yields")
    slope, _ = np.polyfit(t_s_fs[good], np.log(yields[good]), 1)
    return -1.0 / slope


def cmd_fit(args) -> int:
    config = _load(args)
    out = _ensure_out(args)
    try:
        grid = read_csv(args.input)
    except OSError as exc:
        print(f"I/O error: {exc}", file=_sys.stderr)
        return EXIT_IO
    idx = int(np.argmin(np.abs(grid.e_axis - args.energy)))
    if abs(grid.e_axis[idx] - args.energy) > 1.5 * (grid.e_axis[1] - grid.e_axis[0]):
        print(f"energy {args.energy} eV not on the stored axis", file=_sys.stderr)
        return EXIT_DATA
    trace = grid.values[:, idx]
    try:
        maxima = extract_maxima(grid.t_axis, trace)
        fit = fit_lifetime(maxima, omit_leading=args.omit,
                           d0=float(config.system.tau_eff_fs))
    except InsufficientMaximaError as exc:
        print(f"insufficient data: {exc}", file=_sys.stderr)
        return EXIT_DATA
    report = {
        "input": args.input,
        "e_kin_ev": grid.e_axis[idx],
        "omit_leading": args.omit,
        "maxima_used": fit.maxima_used,
        "a": fit.a, "b_fs": fit.b, "c": fit.c,
        "lifetime_fs": fit.d,
        "residual_norm": fit.residual_norm,
    }
    for k, v in report.items():
        print(f"{k} = {v}")
    path = os.path.join(out, "lifetime_fit.csv")
    with open(path, "w") as fh:
        fh.write(",".join(report.keys()) + "\n")
        fh.write(",".join(str(v) for v in report.values()) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    from .tdse import compare_with_analytic

    config = _load(args)
    out = _ensure_out(args)
    deviations = compare_with_analytic(config, n_bins=args.n_bins)
    path = os.path.join(out, "oracle_compare.csv")
    with open(path, "w") as fh:
        fh.write("channel,t_fs,e_kin_ev,p_analytic,p_oracle,rel_deviation\n")
        for dev in deviations:
            for e, pa, po in zip(dev.e_kin_ev, dev.p_analytic, dev.p_oracle):
                rel = (po - pa) / pa if pa else math.inf
                fh.write(f"{dev.channel},{dev.t_fs!r},{e!r},{pa!r},{po!r},{rel!r}\n")
    print(f"wrote {path}")
    failed = False
    for dev in deviations:
        thr = args.sricd_threshold if dev.channel == "sricd" else args.icd_threshold
        status = "pass" if dev.rms_rel <= thr else "FAIL"
        failed |= dev.rms_rel > thr
        print(f"{dev.channel} @ t = {dev.t_fs} fs: RMS deviation "
              f"{dev.rms_rel:.4f} (threshold {thr}) {status}")
    return EXIT_THRESHOLD if failed else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "pump-probe": cmd_pump_probe,
        "fit": cmd_fit,
        "oracle-compare": cmd_oracle_compare,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=_sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
