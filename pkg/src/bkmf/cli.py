"""Command line entry point: ``bkmf run <experiment>`` and ``bkmf list``."""
import argparse
import os
import sys
import time

from .errors import ConfigError, ExperimentFailed
from .experiments import EXPERIMENTS, ExperimentConfig, emit_dat, parse_config_file, run


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bkmf",
        description="Block Krylov approximation of f(A)B with a posteriori error bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list the available experiments")

    p = sub.add_parser("run", help="run one experiment and write its data files")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--n", type=int, help="problem size (meaning depends on the experiment)")
    p.add_argument("--s", type=int, help="block size")
    p.add_argument("--jmax", type=int, help="largest number of Krylov steps")
    p.add_argument("--seed", type=int, help="seed of the random generator")
    p.add_argument("--runs", type=int, help="number of averaged runs (repetitions for timings)")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--paper-scale", action="store_true", default=None,
                   help="use the full problem sizes instead of the desk-scale ones")
    p.add_argument("--config", help="file with key=value lines using the same keys as the flags")
    return parser


def config_from_args(args):
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in ("n", "s", "jmax", "seed", "runs", "out", "paper_scale"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    values.pop("experiment", None)
    return ExperimentConfig(experiment=args.experiment, **values).resolved()


def write_outputs(result, cfg, elapsed):
    os.makedirs(cfg.out, exist_ok=True)
    for name, rows in result.files.items():
        emit_dat(rows, os.path.join(cfg.out, name))
    lines = [f"experiment: {result.experiment}",
             f"n = {cfg.n}, s = {cfg.s}, jmax = {cfg.jmax}, runs = {cfg.runs}, "
             f"seed = {cfg.seed}, paper_scale = {cfg.paper_scale}",
             f"files: {', '.join(sorted(result.files))}",
             *result.summary,
             f"validity: {'OK' if result.valid else 'FAILED'}",
             f"elapsed: {elapsed:.2f} s"]
    with open(os.path.join(cfg.out, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return lines


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in EXPERIMENTS.items():
            print(f"{name:15s} {desc}")
        return 0
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"bkmf: configuration error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        result = run(cfg)
    except ExperimentFailed as exc:
        print(f"bkmf: {exc}", file=sys.stderr)
        return 1
    lines = write_outputs(result, cfg, time.perf_counter() - t0)
    print("\n".join(lines))
    return 0 if result.valid else 1


if __name__ == "__main__":
    sys.exit(main())
