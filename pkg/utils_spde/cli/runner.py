# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Command line entry point `spde-lab`.

    $ spde-lab simulate --alpha 2 --noise white --lambda 0.5,5 --paths 2000 --t 0.5,1,1.5,2
    $ spde-lab oracle --noise riesz:0.5 --lambda 1 --t 0.25
    $ spde-lab certify --alpha 1.5 --cells 256 --modes 64
    $ spde-lab basis --alpha 1.5 --cells 512 --modes 128
"""

import argparse
import logging
import os
import sys

from utils_spde.cli.commands import COMMANDS
from utils_spde.cli.records import LOG_FILE, make_run_dir
from utils_spde.common.config import load_config
from utils_spde.common.exceptions import SpdeLabError, exit_code_for

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            "Expected a comma-separated list of numbers: {}".format(text)
        )


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            "Expected a comma-separated list of integers: {}".format(text)
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spde-lab", description="Fractional stochastic heat equation laboratory"
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", help="JSON configuration file; flags take precedence")
    parser.add_argument("--alpha", type=float, help="Stability index in (1, 2]")
    parser.add_argument(
        "--noise", help="white | riesz:<beta> | bessel:<eta> | frac:<H1>[,<H2>...]"
    )
    parser.add_argument("--sigma", help="linear | additive | pinched:<l>,<L>")
    parser.add_argument("--u0", help="constant:<c> | phi1[:<level>] | bump:<eps>,<level>")
    parser.add_argument(
        "--lambda", dest="lambdas", type=_floats, help="Noise levels, comma separated"
    )
    parser.add_argument(
        "--paths", dest="n_paths", type=int, help="Number of Monte Carlo paths"
    )
    parser.add_argument(
        "--t", dest="times", type=_floats, help="Output times, comma separated"
    )
    parser.add_argument(
        "--p", dest="p_list", type=_ints, help="Moment orders, comma separated"
    )
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument(
        "--eps", dest="epsilon", type=float, help="Shrinking of D_eps, in (0, 1/2)"
    )
    parser.add_argument("--cells", dest="n_cells", type=int, help="Number of grid cells")
    parser.add_argument("--modes", dest="n_modes", type=int, help="Number of eigenmodes")
    parser.add_argument("--dt", type=float, help="Simulation time step")
    parser.add_argument(
        "--workers", dest="num_workers", type=int, help="Worker processes, -1 for all"
    )
    parser.add_argument("--out", dest="output_dir", help="Directory of run directories")
    parser.add_argument(
        "--verbose", action="store_true", default=None, help="Debug logging, progress bars"
    )
    return parser


def _attach_file_log(run_dir):
    handler = logging.FileHandler(os.path.join(run_dir, LOG_FILE))
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def main(argv=None):
    """Runs one command and returns its exit code: 0 ok, 2 invalid config or arguments,
    3 numeric failure, 4 property violation."""
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT
    )
    handler = None
    try:
        config = load_config(args.config, **overrides)
        run_dir = make_run_dir(config.output_dir, args.command, config)
        handler = _attach_file_log(run_dir)
        record = COMMANDS[args.command](config, run_dir)
        logger.info("Run directory {}".format(record.run_dir))
        return 0
    except SpdeLabError as e:
        logger.error("{}: {}".format(type(e).__name__, e))
        return exit_code_for(e)
    finally:
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
