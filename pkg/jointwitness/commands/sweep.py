import argparse
import asyncio
import io

from jointwitness.commands.common import build_config, comma_floats, write_output
from jointwitness.config import settings
from jointwitness.reports import RunConfig
from jointwitness.services.sweep import SweepRow, grid_values, run_sweep, write_sweep_csv

DEFAULT_STEPS = 10


def register(subparsers):
    parser = subparsers.add_parser(
        "sweep",
        help="tabulate negativity and LP verdicts over a grid of |s| and eta as CSV",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--s-values", type=comma_floats, help="comma-separated |s| values in [0, 1]")
    parser.add_argument("--eta-values", type=comma_floats, help="comma-separated eta values in (0, 1]")
    parser.add_argument("--steps", type=int,
                        help=f"use k/steps, k = 1..steps, for any axis not given explicitly (default {DEFAULT_STEPS})")
    parser.add_argument("--no-lp", dest="lp", action="store_false", help="skip the separability LP column")
    parser.add_argument("--workers", type=int, help=f"concurrent rows (default {settings.sweep_workers})")
    parser.add_argument("--config", help="TOML or JSON file with the same options; flags override it")
    parser.add_argument("--output", help="write the CSV here instead of standard output")
    parser.set_defaults(handler=handle)


def cmd_sweep(config: RunConfig) -> list[SweepRow]:
    steps = config.steps or DEFAULT_STEPS
    s_values = config.s_values or grid_values(steps)
    eta_values = config.eta_values or grid_values(steps)
    return asyncio.run(run_sweep(s_values, eta_values, with_lp=config.lp, workers=config.workers))


def handle(options: dict) -> int:
    config = build_config("sweep", options)
    rows = cmd_sweep(config)

    buffer = io.StringIO()
    write_sweep_csv(rows, buffer)
    write_output(buffer.getvalue(), config.output)
    return 0
