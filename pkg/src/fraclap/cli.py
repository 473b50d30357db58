"""Command line entry point ``fraclap``.

Exit status is 0 when every assertion passes, 2 when at least one fails and
1 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from .harness import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraclap", description="Lattice fractional Laplacian experiments on cylinders.")
    p.add_argument("experiment", choices=EXPERIMENTS + ("all",), help="experiment to run, or 'all'")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--s", type=float, nargs="+", dest="s_values", metavar="S", help="fractional orders in (0, 1)")
    p.add_argument("--ell", type=float, nargs="+", dest="ell_values", metavar="ELL", help="ascending cylinder lengths")
    p.add_argument("--hx", type=float, help="section spacing")
    p.add_argument("--ht", type=float, help="axial spacing (defaults to hx)")
    p.add_argument("--samples", type=int, help="random vectors per cell")
    p.add_argument("--baseline", action="store_true", default=None, help="add s = 1 rows")
    p.add_argument("--out", help="directory for JSON and CSV reports")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--quiet", action="store_true", help="print only the summary line")
    return p


def _config(args, experiment: str) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in ("s_values", "ell_values", "hx", "ht", "samples", "baseline", "out",
                                                "seed")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    overrides["experiment"] = experiment
    if args.config:
        return ExperimentConfig.from_file(args.config, **overrides)
    return ExperimentConfig.from_dict(overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    names = EXPERIMENTS if args.experiment == "all" else (args.experiment,)
    failed = 0
    try:
        for name in names:
            start = time.perf_counter()
            report = run_experiment(_config(args, name))
            for a in report.assertions:
                if not args.quiet or not a["passed"]:
                    print(f"{'PASS' if a['passed'] else 'FAIL'}  {name}: {a['name']}")
            n_fail = len(report.failures)
            failed += n_fail
            print(f"{name}: {len(report.assertions) - n_fail}/{len(report.assertions)} assertions passed "
                  f"in {time.perf_counter() - start:.1f}s")
    except (ConfigError, ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"fraclap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
