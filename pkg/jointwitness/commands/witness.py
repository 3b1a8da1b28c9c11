import argparse
import logging

from jointwitness.commands.common import (
    add_eta_argument,
    add_run_arguments,
    add_state_arguments,
    build_config,
    finish,
    new_report,
    resolve_state,
)
from jointwitness.reports import Report, RunConfig
from jointwitness.services.inversion import find_witness

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser(
        "witness",
        help="retrieve the quasi-distribution of a state and test it for negativity",
        argument_default=argparse.SUPPRESS,
    )
    add_state_arguments(parser)
    add_eta_argument(parser)
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)


def cmd_witness(config: RunConfig) -> Report:
    """State -> canonical axes -> joint measurement -> inversion -> negativity."""
    state = resolve_state(config)
    witness = find_witness(state.bloch, eta_override=config.eta)
    logger.info(f"Witness status: {witness.status.value}, min entry {witness.min_entry:.6g}")
    return new_report(config, state, witness)


def handle(options: dict) -> int:
    return finish(cmd_witness(build_config("witness", options)))
