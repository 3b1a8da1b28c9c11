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
from jointwitness.config import settings
from jointwitness.reports import Report, RunConfig, SeparabilitySummary
from jointwitness.services.bloch import canonical_rotation
from jointwitness.services.inversion import default_eta, find_witness
from jointwitness.services.measurement import build_povm, observed_joint
from jointwitness.services.separability import (
    HiddenVariableGrid,
    ResponseFunction,
    max_achievable_correlation,
    separability_feasibility,
)

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser(
        "separability",
        help="decide whether the observed statistics admit a separable hidden-variable model",
        argument_default=argparse.SUPPRESS,
    )
    add_state_arguments(parser)
    add_eta_argument(parser)
    parser.add_argument("--grid-rings", type=int, help=f"rings of the disk grid (default {settings.grid_rings})")
    parser.add_argument("--grid-angles", type=int, help=f"points per ring (default {settings.grid_angles})")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)


def cmd_separability(config: RunConfig) -> Report:
    """Witness plus the LP verdict on the observed statistics in canonical axes."""
    state = resolve_state(config)
    _, canonical = canonical_rotation(state.bloch)

    eta = config.eta
    if eta is None:
        # Any strength gives uniform statistics for the maximally mixed state
        eta = default_eta(canonical.z) if canonical.z > 0 else 1.0

    witness = find_witness(state.bloch, eta_override=eta)
    p_tilde = observed_joint(canonical, build_povm(eta))

    grid = HiddenVariableGrid.disk(
        config.grid_rings or settings.grid_rings,
        config.grid_angles or settings.grid_angles,
    )
    grid_max = max_achievable_correlation(grid)
    warnings = []
    if grid_max < settings.grid_warning_threshold:
        message = (
            f"grid reaches correlation {grid_max:.4g} < {settings.grid_warning_threshold}; "
            "infeasibility may reflect the coarse grid"
        )
        logger.warning(message)
        warnings.append(message)

    verdict = separability_feasibility(p_tilde, ResponseFunction(eta), grid)
    summary = SeparabilitySummary(
        feasible=verdict.feasible,
        regime=verdict.regime.value,
        eta=eta,
        margin=verdict.margin,
        moment_target=verdict.moment_target,
        sufficient_bound=verdict.sufficient_bound,
        disk_bound=verdict.disk_bound,
        grid_points=len(grid),
        grid_max_correlation=grid_max,
        residual=verdict.residual,
        witness_weights=verdict.model.weights.tolist() if verdict.model else None,
        witness_points=[tuple(p) for p in verdict.model.points.tolist()] if verdict.model else None,
    )
    return new_report(config, state, witness, separability=summary, warnings=warnings)


def handle(options: dict) -> int:
    return finish(cmd_separability(build_config("separability", options)))
