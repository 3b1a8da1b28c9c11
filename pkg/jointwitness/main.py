import argparse
import logging
import sys
from typing import Optional

from pydantic import ValidationError

from jointwitness.commands import COMMANDS
from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError, WitnessError
from jointwitness.version import __version__

logger = logging.getLogger("jointwitness")

# Namespace keys that are not run options
_META_KEYS = ("handler", "verbose", "command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointwitness",
        description="Certify nonclassicality of quantum states from joint measurements of two observables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    options = {key: value for key, value in vars(args).items() if key not in _META_KEYS}
    try:
        return args.handler(options)
    except ValidationError as e:
        error = InvalidInputError(f"Invalid run configuration: {e}")
    except WitnessError as e:
        error = e

    logger.debug(f"Exiting with status {error.exit_code}")
    print(f"error: {error.detail}", file=sys.stderr)
    return error.exit_code
