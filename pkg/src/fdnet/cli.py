"""Command-line entry point.

    fdnet run --preset fig5b --engine both --out fig5b.csv
    fdnet run --config job.ini --workers 4
    fdnet validate --workers 4
    fdnet presets

Exit status: 0 success, 1 configuration error, 2 numerical failure (the
failing grid point is named on stderr), 3 acceptance criteria failed.
"""

import argparse
import sys

from . import _accel
from .experiments import (
    ALIASES, PRESETS, GridPointError, preset_settings, run_experiment, spec_from_settings, write_results,
)
from .config import load_settings
from .model import ConfigError
from .specfun import QuadratureError
from .analytic import NumericalError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CRITERIA = 3


def _build_parser():
    parser = argparse.ArgumentParser(prog="fdnet", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured sweep or a figure preset")
    source = run.add_mutually_exclusive_group()
    source.add_argument("--config", metavar="PATH", help="INI experiment file")
    source.add_argument("--preset", metavar="NAME", help="named figure preset (see `fdnet presets`)")
    run.add_argument("--engine", choices=("analytic", "mc", "both"))
    run.add_argument("--seed", type=int)
    run.add_argument("--realizations", type=int, metavar="N")
    run.add_argument("--out", metavar="PATH", help="CSV output path ('-' for stdout)")
    run.add_argument("--workers", type=int, metavar="N")

    val = sub.add_parser("validate", help="run the acceptance suite")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--workers", type=int, default=1)
    val.add_argument("--realizations", type=int, default=10_000, metavar="N")
    val.add_argument("--criteria", default="", help="comma-separated criterion numbers (default: all)")

    sub.add_parser("presets", help="list figure presets")
    return parser


def _overrides(args):
    out = {}
    if args.engine:
        out["experiment.engine"] = args.engine
    if args.seed is not None:
        out["montecarlo.seed"] = args.seed
    if args.realizations is not None:
        out["montecarlo.n_realizations"] = args.realizations
    if args.workers is not None:
        out["montecarlo.workers"] = args.workers
    if args.out:
        out["experiment.output"] = args.out
    return out


def _cmd_run(args):
    overrides = _overrides(args)
    if args.preset:
        settings = preset_settings(args.preset, args.config, overrides=overrides)
    else:
        settings = load_settings(args.config, overrides=overrides)
    spec = spec_from_settings(settings)
    rows = run_experiment(spec)
    if spec.output == "-":
        write_results(rows, sys.stdout)
    else:
        try:
            write_results(rows, spec.output)
        except OSError as exc:
            raise ConfigError(f"cannot write {spec.output}: {exc}") from exc
        print(f"wrote {len(rows)} rows to {spec.output} ({_accel.backend_name()} kernels)", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args):
    from .validation import Validator

    try:
        numbers = [int(v) for v in args.criteria.split(",") if v.strip()] or list(range(1, 11))
    except ValueError as exc:
        raise ConfigError(f"--criteria: {exc}") from exc
    if any(not 1 <= k <= 10 for k in numbers):
        raise ConfigError("criterion numbers run from 1 to 10")
    validator = Validator(seed=args.seed, workers=args.workers, n_realizations=args.realizations)
    results = validator.run(numbers, on_result=lambda r: print(r.line(), flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)} passed, {len(failed)} failed"
          + (f" (criteria {', '.join(map(str, failed))})" if failed else ""))
    return EXIT_CRITERIA if failed else EXIT_OK


def _cmd_presets(_args):
    inverse = {}
    for alias, name in ALIASES.items():
        inverse.setdefault(name, []).append(alias)
    for name, (description, _) in PRESETS.items():
        alias = f" [{', '.join(inverse[name])}]" if name in inverse else ""
        print(f"{name}{alias}: {description}")
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "validate": _cmd_validate, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridPointError, NumericalError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
