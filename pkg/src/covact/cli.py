"""Command-line entry point for the batch experiments.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures (e.g. too many ambiguous identifiability verdicts).
"""

import argparse
import sys

from .config import desk_config, full_scale_config, load_config, save_config
from .errors import NumericalError, ParameterError
from .experiments import run_detect, run_lemma3, run_phase_diagram, run_roc

_RUNNERS = {
    "phase-diagram": run_phase_diagram,
    "roc": run_roc,
    "lemma3": run_lemma3,
    "detect": run_detect,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="covact",
        description="Covariance-based activity detection experiments",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in _RUNNERS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="INI config file (overrides presets)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--threads", type=int, help="trial-level worker count")
        p.add_argument(
            "--full", action="store_true",
            help="use the full-scale preset instead of the desk-scale one",
        )
        p.add_argument(
            "--dump-config", action="store_true",
            help="write the effective config next to the outputs and exit",
        )
    return parser


def resolve_config(args):
    if args.config:
        config = load_config(args.config)
        if config.kind != args.kind:
            raise ParameterError(
                f"config kind {config.kind!r} does not match "
                f"subcommand {args.kind!r}"
            )
    elif args.full:
        config = full_scale_config(args.kind)
    else:
        config = desk_config(args.kind)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if args.threads is not None:
        config.threads = args.threads
    return config.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.dump_config:
            import os

            os.makedirs(config.out_dir, exist_ok=True)
            path = os.path.join(config.out_dir, "config.ini")
            save_config(config, path)
            print(path)
            return 0
        result = _RUNNERS[args.kind](config, progress=print)
        if args.kind == "detect":
            print(result[1])
        print(f"wrote results to {config.out_dir}/")
        return 0
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
