import asyncio
import csv
import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, TextIO

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError
from jointwitness.progress import SweepProgress
from jointwitness.services.bloch import BlochVector
from jointwitness.services.inversion import find_witness
from jointwitness.services.measurement import build_povm, observed_joint, validate_strength
from jointwitness.services.separability import (
    HiddenVariableGrid,
    ResponseFunction,
    separability_feasibility,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["s_norm", "eta", "ratio", "min_entry", "nonclassical", "lp_feasible", "lp_regime"]

# Log progress every this many rows
_PROGRESS_EVERY = 500


@dataclass(frozen=True)
class SweepRow:
    s_norm: float
    eta: float
    ratio: float
    min_entry: float
    nonclassical: bool
    lp_feasible: Optional[bool] = None
    lp_regime: Optional[str] = None

    def as_csv_row(self) -> list:
        return [
            repr(self.s_norm),
            repr(self.eta),
            repr(self.ratio),
            repr(self.min_entry),
            str(self.nonclassical).lower(),
            "" if self.lp_feasible is None else str(self.lp_feasible).lower(),
            self.lp_regime or "",
        ]


def grid_values(steps: int) -> list[float]:
    """k/steps for k = 1..steps."""
    if steps < 1:
        raise InvalidInputError(f"Sweep needs at least one step, got {steps}")
    return [k / steps for k in range(1, steps + 1)]


def evaluate_row(
    s_norm: float,
    eta: float,
    with_lp: bool = True,
    grid: Optional[HiddenVariableGrid] = None
) -> SweepRow:
    """Witness and (optionally) LP verdict for the canonical state (0, 0, s_norm)."""
    s = BlochVector(0.0, 0.0, s_norm)
    report = find_witness(s, eta_override=eta)

    lp_feasible, lp_regime = None, None
    if with_lp:
        p_tilde = observed_joint(s, build_povm(eta))
        verdict = separability_feasibility(p_tilde, ResponseFunction(eta), grid)
        lp_feasible, lp_regime = verdict.feasible, verdict.regime.value

    return SweepRow(
        s_norm=s_norm,
        eta=eta,
        ratio=report.ratio,
        min_entry=report.min_entry,
        nonclassical=report.nonclassical,
        lp_feasible=lp_feasible,
        lp_regime=lp_regime,
    )


async def run_sweep(
    s_values: Iterable[float],
    eta_values: Iterable[float],
    with_lp: bool = True,
    workers: Optional[int] = None
) -> list[SweepRow]:
    """Evaluate every (|s|, eta) pair concurrently; rows come back sorted by (|s|, eta)."""
    s_values = sorted(set(float(v) for v in s_values))
    eta_values = sorted(set(validate_strength(v) for v in eta_values))
    if not s_values or not eta_values:
        raise InvalidInputError("Sweep needs at least one |s| value and one eta value")
    if s_values[0] < 0 or s_values[-1] > 1:
        raise InvalidInputError("Sweep |s| values must lie in [0, 1]")

    pairs = list(product(s_values, eta_values))
    grid = HiddenVariableGrid.default() if with_lp else None
    semaphore = asyncio.Semaphore(workers or settings.sweep_workers)
    progress = SweepProgress()
    progress.start(len(pairs))
    logger.info(f"Sweep of {len(pairs)} rows ({len(s_values)} x {len(eta_values)}), lp={with_lp}")

    async def evaluate(s_norm: float, eta: float) -> SweepRow:
        async with semaphore:
            row = await asyncio.to_thread(evaluate_row, s_norm, eta, with_lp, grid)
        progress.update(s_norm, eta, row.nonclassical, row.lp_feasible)
        if progress.completed_count % _PROGRESS_EVERY == 0:
            logger.info(f"  {progress.completed_count}/{progress.total_count} rows done ({progress.fraction:.0%})")
        return row

    try:
        rows = await asyncio.gather(*(evaluate(s_norm, eta) for s_norm, eta in pairs))
    finally:
        progress.finish()

    logger.info(
        f"Sweep complete: {progress.nonclassical_count} nonclassical, "
        f"{progress.separable_count} separable of {progress.total_count}"
    )
    logger.debug(f"Sweep state: {progress.to_dict()}")
    return list(rows)


def write_sweep_csv(rows: Iterable[SweepRow], stream: TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_row())
