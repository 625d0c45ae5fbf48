"""Entry points: each figure kind is a small script with --in/--out flags."""

import argparse
import sys

from .io import SchemaError
from .lemma3 import plot_lemma3
from .phase import plot_phase
from .roc import plot_roc


def _run(plot_fn, description, argv):
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="input CSV path")
    parser.add_argument("--out", dest="out_base", required=True,
                        help="output image path (extension ignored; "
                             "writes .png and .svg)")
    args = parser.parse_args(argv)
    try:
        png, svg = plot_fn(args.in_path, args.out_base)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(png)
    print(svg)
    return 0


def phase_main(argv=None):
    return _run(plot_phase, "Render the identifiability phase diagram", argv)


def roc_main(argv=None):
    return _run(plot_roc, "Render the PM/PF tradeoff curves", argv)


def lemma3_main(argv=None):
    return _run(plot_lemma3, "Render the interference saturation figure", argv)


if __name__ == "__main__":
    sys.exit(phase_main())
