import argparse

from jointwitness.commands.common import (
    add_eta_argument,
    add_run_arguments,
    add_state_arguments,
    build_config,
    finish,
    new_report,
    resolve_state,
)
from jointwitness.exceptions import InvalidInputError
from jointwitness.reports import Report, RunConfig, SamplingSummary
from jointwitness.services.inversion import find_witness
from jointwitness.services.shots import simulate_certification


def register(subparsers):
    parser = subparsers.add_parser(
        "sample",
        help="simulate a finite number of shots and certify negativity from the counts",
        argument_default=argparse.SUPPRESS,
    )
    add_state_arguments(parser)
    add_eta_argument(parser)
    parser.add_argument("--shots", type=int, help="number of shots (required)")
    parser.add_argument("--seed", type=int, help="PCG64 seed (required)")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)


def cmd_sample(config: RunConfig) -> Report:
    if config.shots is None or config.seed is None:
        raise InvalidInputError("sample needs --shots and --seed")

    state = resolve_state(config)
    witness = find_witness(state.bloch, eta_override=config.eta)
    run = simulate_certification(state.bloch, config.shots, config.seed, eta=config.eta)

    warnings = []
    if run.significance.degenerate:
        warnings.append("zero standard error on the minimum entry: degenerate count vector")

    summary = SamplingSummary(
        shots=run.record.n_shots,
        seed=run.record.seed,
        eta=run.eta,
        covariance=run.estimate.covariance_mode,
        counts=run.record.counts.tolist(),
        estimates=run.estimate.estimates.tolist(),
        stderr=run.estimate.stderr.tolist(),
        min_index=run.significance.min_index,
        min_entry=run.significance.min_entry,
        z_score=run.significance.z_score,
        sigma=run.significance.sigma,
        certified=run.significance.certified,
        degenerate=run.significance.degenerate,
    )
    return new_report(config, state, witness, sampling=summary, warnings=warnings)


def handle(options: dict) -> int:
    return finish(cmd_sample(build_config("sample", options)))
