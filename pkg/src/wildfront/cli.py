"""Command-line entry point: ``wildfront run|table|shoot|fit-lambda``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import export
from .harness import TABLE_HEADER, run_scenario, run_shooting, run_table, write_shooting
from .params import fit_lambda
from .scenario import ConfigError, load_scenario
from .shooting import ShootingError


def _print_dimensionless(s) -> None:
    d = s.dimensionless()
    lin = s.linearization()
    rec = {"lambda": lin if isinstance(lin, float) else lin.Lambda,
           "lambda_mode": "override" if isinstance(lin, float) else "fit"}
    rec.update(d.as_dict())
    rec["speed_scale_mps"] = d.speed_scale
    print(export.format_kv(rec))


def cmd_run(args) -> int:
    s = load_scenario(args.config)
    if args.print_dimensionless:
        _print_dimensionless(s)
        return 0
    report = run_scenario(s, output_dir=args.out)
    print(export.format_kv(report.summary()))
    print(f"# artifacts written to {report.output_dir}", file=sys.stderr)
    failed = [r.error for r in report.variants.values() if r.error]
    return 1 if failed or report.shooting_error else 0


def cmd_shoot(args) -> int:
    s = load_scenario(args.config)
    if args.print_dimensionless:
        _print_dimensionless(s)
        return 0
    report = run_shooting(s)
    rec = report.shooting.as_record(report.dimensionless)
    print(export.format_kv(rec))
    if args.out is not None:
        write_shooting(report, Path(args.out))
    return 0


def cmd_table(args) -> int:
    if args.print_dimensionless:
        for path in args.configs:
            s = load_scenario(path)
            print(f"# {s.name}")
            _print_dimensionless(s)
        return 0
    rows = run_table(args.configs, output_root=args.out, jobs=args.jobs)
    print(",".join(TABLE_HEADER))
    for row in rows:
        print(",".join(export.fmt(v) for v in row))
    return 1 if any(row[2] == "error" for row in rows) else 0


def cmd_fit_lambda(args) -> int:
    fit = fit_lambda(args.tac, args.tinf, tuple(args.range), args.n_samples)
    print(export.format_kv({
        "Lambda": fit.Lambda,
        "rms_residual": fit.rms_residual,
        "T_lo": fit.fit_range[0],
        "T_hi": fit.fit_range[1],
        "n_samples": fit.n_samples,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wildfront", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--print-dimensionless", action="store_true",
                       help="print the scaled parameters as key = value text and exit")
        p.add_argument("--out", type=Path, default=None, help="output directory")

    p = sub.add_parser("run", help="PDE runs (+ shooting for PF_linearized) for one scenario")
    p.add_argument("config", help="scenario file or bundled scenario name")
    add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("table", help="speed table over several scenarios")
    p.add_argument("configs", nargs="+", help="scenario files or bundled scenario names")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    add_common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("shoot", help="travelling-wave speeds by shooting only")
    p.add_argument("config", help="scenario file or bundled scenario name")
    add_common(p)
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("fit-lambda", help="least-squares slope of the linearized reaction rate")
    p.add_argument("--tac", type=float, required=True, help="activation temperature [K]")
    p.add_argument("--tinf", type=float, required=True, help="ambient temperature [K]")
    p.add_argument("--range", type=float, nargs=2, default=(300.0, 1500.0), metavar=("T_LO", "T_HI"))
    p.add_argument("--n-samples", type=int, default=1201)
    p.set_defaults(func=cmd_fit_lambda)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShootingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
