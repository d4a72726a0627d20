"""Command line entry point: ``wavebound <experiment> [options]``.

Each experiment subcommand takes ``--config`` (an INI file, see
:mod:`wavebound.config`) and/or flags that override it. Results go to
``<out>.csv`` and ``<out>.json``; wall-clock time is printed on stderr.
The exit status is 1 when any verdict is FAIL, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import sys
import time

from .config import EXPERIMENTS, default_config, load_config
from .errors import ConfigInvalid, WaveboundError
from .experiments import (THREADS_ENV, RunReport, convergence_sweep, default_threads,
                          gamma_table, load_boundary, run, write_report)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--seed", type=int, help="base seed (sample i uses seed + i)")
    p.add_argument("--out", help="output prefix for .csv and .json")
    p.add_argument("--threads", type=int,
                   help=f"worker threads (default ${THREADS_ENV} or 1)")


def _grid_flags(p: argparse.ArgumentParser, masses: bool = True) -> None:
    p.add_argument("--dim", type=int)
    if masses:
        p.add_argument("--mass", type=float, action="append", help="repeatable")
    p.add_argument("--region", help="ball:R or box:h1,h2,...")
    p.add_argument("--N", type=int, action="append", dest="sizes", help="grid size, repeatable")
    p.add_argument("--extent", type=float, help="half-width L of the box")
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavebound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bekenstein", help="localized entropy-energy bound on seeded data")
    _common(p)
    _grid_flags(p)

    p = sub.add_parser("gamma", help="exterior minimum energy and flux cross-check")
    _common(p)
    _grid_flags(p)
    p.add_argument("--boundary-file", help="CSV angle,value of the boundary trace")
    p.add_argument("--lout", type=float, help="truncation radius")
    p.add_argument("--refine", type=int, default=0, help="extra mesh doublings")

    p = sub.add_parser("eigen", help="lowest eigenvalue of the weighted radial form")
    _common(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--n", type=int, action="append", dest="sizes", help="radial nodes")
    p.add_argument("--extrapolate", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("u1", help="U(1) current entropies, ant formula and balance")
    _common(p)
    p.add_argument("--profile-file", help="CSV x,f on a uniform grid of 2^k points")
    p.add_argument("--cut", type=float, action="append", dest="cuts")
    p.add_argument("--interval", type=float, nargs=2)
    p.add_argument("--ant", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--balance", type=float, nargs=2)
    p.add_argument("--N", type=int, action="append", dest="sizes")
    p.add_argument("--extent", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("balance", help="wedge entropy balance and convexity in 1+1")
    _common(p)
    _grid_flags(p)

    p = sub.add_parser("qdec", help="second derivative of half-space entropies")
    _common(p)
    _grid_flags(p)
    p.add_argument("--cut", type=float, action="append", dest="cuts")

    p = sub.add_parser("sweep", help="convergence study at doubling resolutions")
    _common(p)
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--levels", type=int)
    _grid_flags(p)
    return parser


_KEYS = ("dim", "sizes", "region", "extent", "samples", "tol", "cuts", "interval",
         "balance", "extrapolate", "ant", "levels", "seed")


def _overrides(args) -> dict:
    kw = {k: getattr(args, k) for k in _KEYS if getattr(args, k, None) is not None}
    for k in ("sizes", "cuts", "interval", "balance"):
        if k in kw:
            kw[k] = tuple(kw[k])
    if getattr(args, "mass", None):
        kw["masses"] = tuple(args.mass)
    if getattr(args, "profile_file", None):
        kw["profile_file"] = args.profile_file
    if args.out:
        kw["output"] = args.out
    return kw


def make_config(args):
    name = args.command if args.command != "sweep" else args.experiment
    kw = _overrides(args)
    if args.config:
        cfg = load_config(args.config)
        if name is not None and cfg.name != name:
            raise ConfigInvalid(f"config is for {cfg.name!r}, not {name!r}")
        return cfg.with_overrides(**kw)
    if name is None:
        raise ConfigInvalid("sweep needs --experiment or --config")
    return default_config(name, **kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads if args.threads is not None else default_threads()
    t0 = time.perf_counter()
    try:
        cfg = make_config(args)
        if args.command == "gamma" and args.boundary_file:
            h = load_boundary(args.boundary_file, cfg.dim)
            report = RunReport("gamma", cfg.seed, gamma_table(
                h, cfg.make_region().half_width, cfg.masses[0], args.lout,
                args.refine, cfg.tolerance))
        elif args.command == "sweep":
            report = RunReport(cfg.name, cfg.seed, convergence=convergence_sweep(cfg))
        else:
            report = run(cfg, threads)
        write_report(report, cfg.output, cfg)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WaveboundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    counts = ", ".join(f"{k}={v}" for k, v in sorted(report.verdicts.items()))
    print(f"{cfg.name}: {counts or 'no verdicts'} -> {cfg.output}.csv", file=sys.stderr)
    print(f"wall-clock {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
