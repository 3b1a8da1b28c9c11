import argparse
import asyncio
import logging
import math
import sys
from datetime import datetime
from pathlib import Path
from typing import NamedTuple

import numpy as np

from jointwitness import database
from jointwitness.config import read_config_file, settings, tolerances
from jointwitness.exceptions import InvalidInputError
from jointwitness.reports import Report, RunConfig, StateSummary, WitnessSummary, render_text
from jointwitness.services.bloch import (
    BlochVector,
    PureStateVector,
    density_to_bloch,
    embed_pure_state,
    glauber_coherent_state,
    project_mixed_to_qubit,
)
from jointwitness.services.history import record_run
from jointwitness.services.inversion import WitnessReport, WitnessStatus
from jointwitness.version import __version__

logger = logging.getLogger(__name__)


class ResolvedState(NamedTuple):
    bloch: BlochVector
    summary: StateSummary
    warnings: list[str]


def comma_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def comma_ints(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def comma_strings(text: str) -> list[str]:
    return [part.strip() for part in text.split(",")]


def add_state_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("state (exactly one)")
    group.add_argument("--bloch", type=comma_floats, help="Bloch vector sx,sy,sz")
    group.add_argument("--density", type=comma_strings,
                       help="density matrix entries, row-major, complex allowed (e.g. 0.5,0.25-0.25j,...)")
    group.add_argument("--basis", type=comma_ints,
                       help="basis indices i,j of the two-dimensional subspace for --density with d > 2")
    group.add_argument("--pure", type=comma_strings, help="pure-state amplitudes, normalized on input")
    group.add_argument("--coherent", help="Glauber coherent-state amplitude alpha (needs --dim)")
    group.add_argument("--dim", type=int, help="Hilbert-space dimension for --pure or --coherent")


def add_eta_argument(parser: argparse.ArgumentParser):
    parser.add_argument("--eta", type=float, help="measurement strength in (0, 1]")


def _complex_entries(values: list[str], what: str) -> np.ndarray:
    try:
        return np.array([complex(v.replace(" ", "")) for v in values])
    except ValueError:
        raise InvalidInputError(f"Could not parse {what} entries {values}")


def resolve_state(config: RunConfig) -> ResolvedState:
    """Turn whichever state the config describes into a Bloch vector."""
    warnings: list[str] = []

    if config.bloch is not None:
        s = BlochVector(*config.bloch)
        return ResolvedState(s, _summary("bloch", s), warnings)

    if config.density is not None:
        entries = _complex_entries(config.density, "density matrix")
        dim = math.isqrt(entries.size)
        if dim * dim != entries.size or dim < 2:
            raise InvalidInputError(f"Density matrix needs d*d entries with d >= 2, got {entries.size}")
        rho = entries.reshape(dim, dim)
        if dim == 2:
            s = density_to_bloch(rho)
            return ResolvedState(s, _summary("density", s), warnings)

        i, j = config.basis or (0, 1)
        if i == j or not (0 <= i < dim and 0 <= j < dim):
            raise InvalidInputError(f"Basis indices {i},{j} must be distinct and below {dim}")
        identity = np.eye(dim)
        s, weight = project_mixed_to_qubit(rho, (identity[i], identity[j]))
        if weight < 1:
            warnings.append(f"projected state carries weight {weight:.6g}; the witness applies to the subspace")
        return ResolvedState(s, _summary("density", s, dim=dim, weight=weight), warnings)

    if config.pure is not None:
        amplitudes = _complex_entries(config.pure, "pure-state")
        if config.dim is not None and config.dim != amplitudes.size:
            raise InvalidInputError(f"--dim {config.dim} does not match {amplitudes.size} amplitudes")
        psi = PureStateVector.normalized(amplitudes)
        s = embed_pure_state(psi)
        return ResolvedState(s, _summary("pure", s, dim=psi.dim), warnings)

    alpha = _complex_entries([config.coherent], "coherent amplitude")[0]
    psi = glauber_coherent_state(alpha, config.dim)
    s = embed_pure_state(psi)
    return ResolvedState(s, _summary("coherent", s, dim=psi.dim), warnings)


def _summary(source: str, s: BlochVector, dim: int = 2, weight: float = 1.0) -> StateSummary:
    return StateSummary(source=source, bloch=(s.x, s.y, s.z), norm=s.norm, dim=dim, subspace_weight=weight)


def witness_summary(report: WitnessReport) -> WitnessSummary:
    return WitnessSummary(
        status=report.status.value,
        nonclassical=report.nonclassical,
        eta=report.eta,
        ratio=report.ratio,
        min_entry=report.min_entry,
        canonical=(report.canonical.x, report.canonical.y, report.canonical.z),
        rotation=report.rotation.matrix.tolist(),
        observed=None if report.observed is None else report.observed.probs.tolist(),
        quasi=report.quasi.probs.tolist(),
    )


def new_report(config: RunConfig, state: ResolvedState, witness: WitnessReport, **blocks) -> Report:
    warnings = list(state.warnings)
    if witness.status is WitnessStatus.ETA_ABOVE_THRESHOLD:
        warnings.append("eta is not below sqrt(3)|s|; no negativity at this strength")
    warnings.extend(blocks.pop("warnings", []))
    return Report(
        version=__version__,
        command=config.command,
        generated_at=datetime.now(),
        config=config,
        state=state.summary,
        witness=witness_summary(witness),
        tolerances=tolerances(),
        warnings=warnings,
        **blocks,
    )


def write_output(text: str, output: str | None):
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def emit_report(report: Report):
    config = report.config
    text = report.model_dump_json(indent=2) + "\n" if config.format == "json" else render_text(report)
    write_output(text, config.output)


def add_run_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML or JSON file with the same options; flags override it")
    parser.add_argument("--format", choices=["text", "json"], help="report format (default text)")
    parser.add_argument("--output", help="write the report here instead of standard output")
    parser.add_argument("--record", action="store_true", help="store the report in the run history")


def build_config(command: str, options: dict) -> RunConfig:
    """Merge config-file values under the command-line flags and validate."""
    values = {}
    config_path = options.pop("config", None)
    if config_path:
        values.update(read_config_file(Path(config_path)))
    values.update(options)
    values["command"] = command
    return RunConfig.model_validate(values)


def finish(report: Report) -> int:
    emit_report(report)
    if report.config.record or settings.record_runs:
        asyncio.run(_record(report))
    return 0


async def _record(report: Report):
    try:
        await record_run(report)
    finally:
        await database.close_db()
