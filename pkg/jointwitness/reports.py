"""Run configuration and machine-readable reports.

Field names are part of the output format. Every list of four values follows
the outcome order ((+1,+1), (+1,-1), (-1,+1), (-1,-1)).
"""
from datetime import datetime
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from jointwitness.services.measurement import OUTCOMES

Command = Literal["witness", "separability", "sweep", "sample"]
STATE_FIELDS = ("bloch", "density", "pure", "coherent")


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command

    # State, exactly one of these except for sweeps
    bloch: Optional[tuple[float, float, float]] = None
    density: Optional[list[str]] = None
    basis: Optional[tuple[int, int]] = None
    pure: Optional[list[str]] = None
    coherent: Optional[str] = None
    dim: Optional[int] = Field(default=None, ge=2)

    eta: Optional[float] = None
    grid_rings: Optional[int] = Field(default=None, ge=1)
    grid_angles: Optional[int] = Field(default=None, ge=1)

    shots: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)

    s_values: Optional[list[float]] = None
    eta_values: Optional[list[float]] = None
    steps: Optional[int] = Field(default=None, ge=1)
    lp: bool = True
    workers: Optional[int] = Field(default=None, ge=1)

    format: Literal["text", "json"] = "text"
    output: Optional[str] = None
    record: bool = False

    @field_validator("eta")
    @classmethod
    def eta_in_range(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0 < value <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {value}")
        return value

    @model_validator(mode="after")
    def one_state(self) -> "RunConfig":
        given = [name for name in STATE_FIELDS if getattr(self, name) is not None]
        if self.command == "sweep":
            if given:
                raise ValueError(f"sweep takes no state, got --{given[0]}")
            return self
        if len(given) != 1:
            raise ValueError(
                f"exactly one of --bloch, --density, --pure, --coherent is required, got {len(given)}"
            )
        if self.coherent is not None and self.dim is None:
            raise ValueError("--coherent needs --dim")
        if self.basis is not None and self.density is None:
            raise ValueError("--basis only applies to --density")
        return self


class StateSummary(BaseModel):
    source: Literal["bloch", "density", "pure", "coherent"]
    bloch: tuple[float, float, float]
    norm: float
    dim: int = 2
    subspace_weight: float = 1.0


class WitnessSummary(BaseModel):
    status: str
    nonclassical: bool
    eta: Optional[float]
    ratio: float
    min_entry: float
    canonical: tuple[float, float, float]
    rotation: list[list[float]]
    observed: Optional[list[float]]
    quasi: list[float]


class SeparabilitySummary(BaseModel):
    feasible: bool
    regime: str
    eta: float
    margin: float
    moment_target: float
    sufficient_bound: float
    disk_bound: float
    grid_points: int
    grid_max_correlation: float
    residual: Optional[float] = None
    witness_weights: Optional[list[float]] = None
    witness_points: Optional[list[tuple[float, float, float]]] = None


class SamplingSummary(BaseModel):
    shots: int
    seed: int
    prng: str = "PCG64"
    eta: float
    covariance: str
    counts: list[int]
    estimates: list[float]
    stderr: list[float]
    min_index: int
    min_entry: float
    z_score: float
    sigma: float
    certified: bool
    degenerate: bool


class Report(BaseModel):
    version: str
    command: Command
    generated_at: datetime
    config: RunConfig
    state: StateSummary
    witness: WitnessSummary
    separability: Optional[SeparabilitySummary] = None
    sampling: Optional[SamplingSummary] = None
    tolerances: dict[str, float]
    warnings: list[str] = Field(default_factory=list)


def _outcome_label(index: int) -> str:
    x, y = OUTCOMES[index]
    return f"({x:+d},{y:+d})"


def render_text(report: Report) -> str:
    """Human-readable summary of a report."""
    state, witness = report.state, report.witness
    lines = [
        f"jointwitness {report.version} - {report.command}",
        f"State ({state.source}, d={state.dim}): s = ({state.bloch[0]:.6g}, {state.bloch[1]:.6g}, {state.bloch[2]:.6g}), |s| = {state.norm:.6g}",
    ]
    if state.subspace_weight < 1:
        lines.append(f"  subspace weight: {state.subspace_weight:.6g}")

    eta = "none" if witness.eta is None else f"{witness.eta:.6g}"
    lines.append(f"Witness: {witness.status} (eta = {eta}, sqrt(3)|s|/eta = {witness.ratio:.6g})")
    for index, value in enumerate(witness.quasi):
        lines.append(f"  p{_outcome_label(index)} = {value:+.7f}")
    lines.append(f"  min entry = {witness.min_entry:+.7f}, nonclassical = {witness.nonclassical}")

    if report.separability:
        sep = report.separability
        lines.append(
            f"Separability: {sep.regime} (margin {sep.margin:.3g}, moment target {sep.moment_target:.6g}, "
            f"disk bound {sep.disk_bound}, sufficient bound {sep.sufficient_bound})"
        )
        if sep.witness_weights:
            lines.append(f"  hidden-variable model with {len(sep.witness_weights)} points, residual {sep.residual:.3g}")

    if report.sampling:
        smp = report.sampling
        lines.append(f"Sampling: {smp.shots} shots, seed {smp.seed} ({smp.prng}), counts {smp.counts}")
        lines.append(
            f"  min estimate p{_outcome_label(smp.min_index)} = {smp.min_entry:+.7f} +/- {smp.stderr[smp.min_index]:.3g}, "
            f"z = {smp.z_score:.3g}, certified at {smp.sigma:g} sigma = {smp.certified}"
        )

    for warning in report.warnings:
        lines.append(f"Warning: {warning}")
    return "\n".join(lines) + "\n"
