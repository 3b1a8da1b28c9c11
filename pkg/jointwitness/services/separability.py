"""Separable hidden-variable models of the observed joint statistics.

A classical model is a distribution of weights p_j over vectors lambda_j in
the unit ball, each responding to the two observables independently with the
same linear form as the observed marginals:

    A(a | lambda) = (1 + a (eta / sqrt(3)) lambda_a) / 2.

The observed statistics are separable when they equal
sum_j p_j X(x | lambda_j) Y(y | lambda_j). Only lambda_x and lambda_y enter, so
the search runs over a discretized unit disk and is a small linear program.
Negativity of the retrieved quasi-distribution rules separability out; on the
disk the largest reachable correlation moment is 1/2, so the program also
finds infeasibility below that sufficient condition.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError, SolverError
from jointwitness.services.inversion import QuasiDistribution
from jointwitness.services.measurement import (
    OUTCOMES,
    SQRT3,
    JointDistribution,
    validate_strength,
)

logger = logging.getLogger(__name__)

SUFFICIENT_BOUND = 1.0
DISK_BOUND = 0.5

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}
# Weights below this are dropped from a returned witness
_SUPPORT_CUTOFF = 1e-13


@dataclass(frozen=True, eq=False)
class HiddenVariableModel:
    weights: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).ravel()
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] != weights.size:
            raise InvalidInputError(
                f"Need one 3-vector per weight, got {points.shape} for {weights.size} weights"
            )
        if weights.size == 0:
            raise InvalidInputError("Hidden-variable model has no points")
        if weights.min() < 0:
            raise InvalidInputError(f"Negative hidden-variable weight {weights.min():.3g}")
        if abs(weights.sum() - 1) > 1e-12:
            raise InvalidInputError(f"Hidden-variable weights sum to {weights.sum():.15g}")
        if np.linalg.norm(points, axis=1).max() > 1 + 1e-12:
            raise InvalidInputError("Hidden-variable vector outside the unit ball")

        weights.flags.writeable = False
        points.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class ResponseFunction:
    """Observed conditional probabilities A(a | lambda) for strength eta."""
    strength: float

    def __post_init__(self):
        object.__setattr__(self, "strength", validate_strength(self.strength))

    def probability(self, a: int, component) -> np.ndarray:
        return 0.5 * (1 + a * self.gain * np.asarray(component, dtype=float))

    @property
    def gain(self) -> float:
        """eta / sqrt(3), the factor on each lambda component."""
        return self.strength / SQRT3

    def deviation_rows(self, lam_x, lam_y) -> np.ndarray:
        """X(x | lambda) Y(y | lambda) - 1/4 for every outcome (rows) and point (columns)."""
        k = self.gain
        lam_x = np.asarray(lam_x, dtype=float)
        lam_y = np.asarray(lam_y, dtype=float)
        return np.array([
            0.25 * (x * k * lam_x + y * k * lam_y + x * y * k * k * lam_x * lam_y) for x, y in OUTCOMES
        ])

    def moments(self, p_tilde: JointDistribution) -> np.ndarray:
        """(1, m_x, m_y, c): the weight, first and correlation moments a separable model must have."""
        d = p_tilde.deviation
        k = self.gain
        m_x = sum(x * d[i] for i, (x, _) in enumerate(OUTCOMES)) / k
        m_y = sum(y * d[i] for i, (_, y) in enumerate(OUTCOMES)) / k
        c = sum(x * y * d[i] for i, (x, y) in enumerate(OUTCOMES)) / (k * k)
        return np.array([1.0, m_x, m_y, c])


@dataclass(frozen=True, eq=False)
class HiddenVariableGrid:
    """Discretized unit disk of (lambda_x, lambda_y) values."""
    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
            raise InvalidInputError(f"Grid must be a nonempty list of 2-vectors, got {points.shape}")
        if np.linalg.norm(points, axis=1).max() > 1 + 1e-12:
            raise InvalidInputError("Grid point outside the unit disk")
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

    @classmethod
    def disk(cls, rings: int, angles: int) -> "HiddenVariableGrid":
        """Center plus `rings` concentric circles of radius k/rings with `angles` points each."""
        if rings < 1 or angles < 1:
            raise InvalidInputError(f"Grid needs at least one ring and one angle, got {rings}x{angles}")
        radii = np.arange(1, rings + 1) / rings
        phis = 2 * np.pi * np.arange(angles) / angles
        ring_points = [(r * math.cos(phi), r * math.sin(phi)) for r in radii for phi in phis]
        return cls(np.array([(0.0, 0.0)] + ring_points))

    @classmethod
    def from_points(cls, points) -> "HiddenVariableGrid":
        return cls(np.asarray(points, dtype=float))

    @classmethod
    def default(cls) -> "HiddenVariableGrid":
        return cls.disk(settings.grid_rings, settings.grid_angles)

    def __len__(self) -> int:
        return self.points.shape[0]


class SeparabilityRegime(str, enum.Enum):
    SEPARABLE = "separable"
    BEYOND_SUFFICIENT = "nonseparable beyond the sufficient condition"
    NEGATIVITY = "nonseparable by negativity"


@dataclass(frozen=True, eq=False)
class SeparabilityVerdict:
    feasible: bool
    margin: float
    moment_target: float
    regime: SeparabilityRegime
    model: Optional[HiddenVariableModel] = None
    residual: Optional[float] = None
    sufficient_bound: float = SUFFICIENT_BOUND
    disk_bound: float = DISK_BOUND


def separable_statistics(model: HiddenVariableModel, response: ResponseFunction) -> JointDistribution:
    rows = response.deviation_rows(model.points[:, 0], model.points[:, 1])
    return JointDistribution.from_deviation(rows @ model.weights)


def inverted_separable_statistics(model: HiddenVariableModel) -> QuasiDistribution:
    """sum_j p_j (1 + x lambda_jx)(1 + y lambda_jy) / 4, the inversion of separable statistics."""
    lam_x, lam_y = model.points[:, 0], model.points[:, 1]
    probs = [
        float(np.sum(model.weights * 0.25 * (1 + x * lam_x) * (1 + y * lam_y)))
        for x, y in OUTCOMES
    ]
    return QuasiDistribution(np.array(probs))


def moment_target(p_tilde: JointDistribution, eta: float) -> float:
    """Correlation moment sum_j p_j lambda_jx lambda_jy a separable model would need."""
    return float(ResponseFunction(eta).moments(p_tilde)[3])


def _moment_rows(grid: HiddenVariableGrid) -> np.ndarray:
    """(1, lambda_x, lambda_y, lambda_x lambda_y) for every grid point (columns)."""
    lam_x, lam_y = grid.points[:, 0], grid.points[:, 1]
    return np.vstack([np.ones(len(grid)), lam_x, lam_y, lam_x * lam_y])


def _solve(c, a_eq, b_eq, what: str):
    result = linprog(
        c,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if result.status != 0:
        raise SolverError(f"Linear program for {what} failed", status=result.status, message=result.message)
    return result


def _centered_weights(
    rows: np.ndarray,
    grid: HiddenVariableGrid,
    target: np.ndarray
) -> Optional[np.ndarray]:
    """Exact-equality weights with the least second moment, or None if the solver balks."""
    second_moment = np.sum(grid.points ** 2, axis=1)
    result = linprog(
        second_moment,
        A_eq=rows,
        b_eq=target,
        bounds=(0, None),
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if result.status != 0:
        logger.debug(f"Centered witness unavailable ({result.message}); keeping phase-one weights")
        return None
    if np.abs(rows @ result.x - target).max() > settings.lp_tolerance:
        return None
    return result.x


def separability_feasibility(
    p_tilde: JointDistribution,
    response: ResponseFunction,
    grid: Optional[HiddenVariableGrid] = None
) -> SeparabilityVerdict:
    """Search weights over the grid that reproduce p_tilde with product responses.

    For responses linear in lambda the four outcome equations are equivalent
    to matching the weight, the two first moments and the correlation moment,
    which is how the program is posed; margins and residuals are in moment
    units whatever eta is. Phase one: nonnegative slacks absorb the residual of
    each moment equation and their sum is minimized. A minimum at or below
    lp_tolerance means separable; otherwise the minimum is the infeasibility
    margin.
    """
    grid = grid or HiddenVariableGrid.default()
    n_points = len(grid)
    rows = _moment_rows(grid)
    target = response.moments(p_tilde)

    n_eq = rows.shape[0]
    a_eq = np.hstack([rows, np.eye(n_eq), -np.eye(n_eq)])
    cost = np.concatenate([np.zeros(n_points), np.ones(2 * n_eq)])

    result = _solve(cost, a_eq, target, "separability")
    margin = float(result.fun)
    correlation = float(target[3])
    feasible = margin <= settings.lp_tolerance

    if feasible:
        weights = _centered_weights(rows, grid, target)
        if weights is None:
            weights = result.x[:n_points]
        weights = np.clip(weights, 0.0, None)
        support = weights > _SUPPORT_CUTOFF
        weights = weights[support] / weights[support].sum()
        points = np.column_stack([grid.points[support], np.zeros(support.sum())])
        model = HiddenVariableModel(weights, points)
        residual = float(np.abs(rows[:, support] @ weights - target).max())
        logger.info(f"Separable: {len(model)}-point model, moment residual {residual:.3g}")
        return SeparabilityVerdict(
            feasible=True,
            margin=margin,
            moment_target=correlation,
            regime=SeparabilityRegime.SEPARABLE,
            model=model,
            residual=residual,
        )

    regime = SeparabilityRegime.NEGATIVITY if correlation > SUFFICIENT_BOUND else SeparabilityRegime.BEYOND_SUFFICIENT
    logger.info(f"Not separable: margin {margin:.3g}, moment target {correlation:.6g} ({regime.value})")
    return SeparabilityVerdict(feasible=False, margin=margin, moment_target=correlation, regime=regime)


def max_achievable_correlation(grid: HiddenVariableGrid) -> float:
    """Largest sum_g w_g lambda_x lambda_y over the grid with both first moments zero."""
    rows = _moment_rows(grid)
    result = _solve(-rows[3], rows[:3], np.array([1.0, 0.0, 0.0]), "maximum correlation")
    return float(-result.fun)


def _zero_marginal_statistics(target: float, eta: float) -> JointDistribution:
    k2 = eta ** 2 / 3
    return JointDistribution.from_deviation(np.array([0.25 * x * y * k2 * target for x, y in OUTCOMES]))


def separability_threshold(
    response: ResponseFunction,
    grid: Optional[HiddenVariableGrid] = None,
    tolerance: float = 1e-6
) -> float:
    """Largest separable moment target at zero marginals, by bisection.

    The separable moments form a convex set containing 0, so feasibility is
    monotone in the target.
    """
    grid = grid or HiddenVariableGrid.default()
    low, high = 0.0, SUFFICIENT_BOUND

    if separability_feasibility(_zero_marginal_statistics(high, response.strength), response, grid).feasible:
        return high

    while high - low > tolerance:
        mid = 0.5 * (low + high)
        verdict = separability_feasibility(_zero_marginal_statistics(mid, response.strength), response, grid)
        if verdict.feasible:
            low = mid
        else:
            high = mid
    logger.info(f"Separability threshold {low:.6g} on a {len(grid)}-point grid")
    return low


def random_hidden_variable_model(n_points: int, rng: np.random.Generator) -> HiddenVariableModel:
    """Flat-simplex weights on points uniform in the unit ball."""
    weights = rng.dirichlet(np.ones(n_points))
    directions = rng.normal(size=(n_points, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.random(n_points) ** (1 / 3)
    return HiddenVariableModel(weights, directions * radii[:, None])
