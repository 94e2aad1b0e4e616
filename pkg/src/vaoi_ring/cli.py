"""Command line entry point: ``vaoi-ring <verb> --config FILE --out DIR``."""
from __future__ import annotations

import argparse
import logging
import sys

from .core import ParamError
from .experiments import KINDS, run, spec_from_config
from .mdp import ConvergenceError

EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vaoi-ring", description=__doc__)
    parser.add_argument("verb", choices=KINDS)
    parser.add_argument("--config", help="TOML config; defaults are used for missing keys")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, help="parallel beta points (beta-sweep)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    overrides = {} if args.workers is None else {"workers": args.workers}
    try:
        spec = spec_from_config(args.verb, args.config, args.out, **overrides)
        run(spec)
    except (ParamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
