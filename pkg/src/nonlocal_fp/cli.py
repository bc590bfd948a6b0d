"""Command-line entry point: ``run``, ``verify-semigroup`` and ``inspect``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import diagnostics as diag
from .config import CHECK_NAMES, RunConfig, parse_config, render_config
from .errors import ConfigError, DiagnosticsError, SnapshotError
from .evolution import run
from .grid import integrate, make_grid
from .output import (
    ensure_dir,
    load_snapshot,
    write_plot_data,
    write_reports,
    write_series,
    write_snapshots,
)
from .semigroup import verify_spa_estimates

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3


def evaluate_checks(cfg: RunConfig, history: diag.RunHistory, names, threads: int = 1) -> list[diag.PropertyReport]:
    """Run the named checks. Refinement checks add runs at dt/2 and dt/4."""
    reports = []
    refined = None
    for name in names:
        fn = diag.CHECKS[name]
        try:
            if name in diag.REFINEMENT_CHECKS:
                if refined is None:
                    refined = [history] + [run(cfg, dt=cfg.dt / f) for f in (2, 4)]
                    bad = [h for h in refined if h.error]
                    if bad:
                        raise DiagnosticsError(f"refinement run failed: {bad[0].error[0]}")
                reports.append(fn(refined))
            else:
                reports.append(fn(history))
        except DiagnosticsError as exc:
            reports.append(diag.PropertyReport(name, "fail", float("nan"), float("nan"),
                                               float("nan"), f"{type(exc).__name__}: {exc}"))
    return reports


def run_simulation(cfg: RunConfig, output_dir=None, threads: int = 1, checks=None) -> int:
    """Run ``cfg``, write the artifacts and return the exit status."""
    out = ensure_dir(output_dir or cfg.output_dir)
    names = tuple(checks) if checks is not None else cfg.checks
    with sfft.set_workers(max(1, int(threads))):
        history = run(cfg)
        grid = make_grid(cfg.dim, cfg.grid)
        (out / "config.txt").write_text(render_config(cfg))
        write_series(history, out / "series.csv")
        write_snapshots(history, grid, out)
        write_plot_data(history, out / "plots")
        if history.error:
            name, msg, t_fail = history.error
            report = diag.PropertyReport(f"solver:{name}", "fail", float("nan"), float("nan"), t_fail, msg)
            write_reports([report], out / "reports.csv")
            return EXIT_SOLVER
        reports = evaluate_checks(cfg, history, names, threads)
    write_reports(reports, out / "reports.csv")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK_FAILED


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        checks = None
        if args.checks:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
            for c in checks:
                if c not in CHECK_NAMES:
                    raise ConfigError(f"unknown check {c!r}")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = run_simulation(cfg, output_dir=args.output_dir, threads=args.threads, checks=checks)
    print(f"exit status {status}")
    return status


def _cmd_verify(args) -> int:
    grid = make_grid(len(args.grid), args.grid)
    ts = np.logspace(np.log10(args.t_min), np.log10(args.t_max), args.samples)
    rep = verify_spa_estimates(args.sigma, args.beta, ts, grid=grid)
    print(rep.csv_header())
    print(rep.csv_row())
    return EXIT_OK if rep.status == "pass" else EXIT_CHECK_FAILED


def _cmd_inspect(args) -> int:
    try:
        grid, values, t = load_snapshot(args.snapshot)
    except (SnapshotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"n = {grid.n}")
    print("sizes = " + " ".join(str(s) for s in grid.sizes))
    print(f"t = {t!r}")
    print(f"mass = {integrate(grid, values)!r}")
    print(f"min = {float(values.min())!r}")
    print(f"max = {float(values.max())!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-fp", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a configuration and write artifacts")
    r.add_argument("config")
    r.add_argument("--output-dir", default=None)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--checks", default=None, help="comma-separated check names")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify-semigroup", help="empirical constant of the semigroup smoothing bound")
    v.add_argument("--sigma", type=float, required=True)
    v.add_argument("--beta", type=float, required=True)
    v.add_argument("--grid", type=int, nargs="+", default=[64, 64])
    v.add_argument("--t-min", type=float, default=1e-4)
    v.add_argument("--t-max", type=float, default=10.0)
    v.add_argument("--samples", type=int, default=40)
    v.set_defaults(func=_cmd_verify)

    i = sub.add_parser("inspect", help="print the header and summary of a snapshot")
    i.add_argument("snapshot")
    i.set_defaults(func=_cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
