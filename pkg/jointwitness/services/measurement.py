"""Four-outcome joint measurement of two qubit observables.

Each outcome pair (x, y) in {-1, +1}^2 has the effect
(sigma_0 + eta(x, y) . sigma) / 4. The standard family uses
eta(x, y) = (eta / sqrt(3)) (x, y, xy), a simultaneous noisy measurement of
sigma_x and sigma_y whose strength eta lies in (0, 1]. At eta = 1 the four
probabilities sample the SU(2) Husimi function of the state at four points.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError
from jointwitness.services.bloch import PAULI, SIGMA_0, BlochVector, DensityMatrix2

logger = logging.getLogger(__name__)

# Fixed outcome order used for every array and every file
OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))
OUTCOME_VALUES = (1, -1)

SQRT3 = math.sqrt(3.0)


def outcome_index(x: int, y: int) -> int:
    try:
        return OUTCOMES.index((x, y))
    except ValueError:
        raise InvalidInputError(f"Outcome ({x}, {y}) is not in {{-1, +1}}^2")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.flags.writeable = False
    return array


def validate_strength(eta: float) -> float:
    eta = float(eta)
    if not math.isfinite(eta) or eta <= 0 or eta > 1:
        raise InvalidInputError(f"Measurement strength eta must lie in (0, 1], got {eta}")
    return eta


@dataclass(frozen=True, eq=False)
class EtaVectors:
    """The four vectors eta(x, y), rows in OUTCOMES order.

    strength is the scalar eta for the standard family, None for custom vectors.
    """
    vectors: np.ndarray
    strength: Optional[float] = None

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.shape != (4, 3):
            raise InvalidInputError(f"Need four 3-vectors, got shape {vectors.shape}")

        norms = np.linalg.norm(vectors, axis=1)
        if norms.max() > 1 + 1e-12:
            raise InvalidInputError(f"Effect vector norm {norms.max():.15g} exceeds 1; effect not positive")
        total = vectors.sum(axis=0)
        if np.abs(total).max() > 1e-12:
            raise InvalidInputError(f"Effect vectors sum to {total}, effects do not sum to identity")

        object.__setattr__(self, "vectors", _frozen(vectors))

    @classmethod
    def standard(cls, eta: float) -> "EtaVectors":
        eta = validate_strength(eta)
        vectors = [(eta / SQRT3) * np.array([x, y, x * y]) for x, y in OUTCOMES]
        return cls(np.array(vectors), strength=eta)

    def __getitem__(self, outcome: tuple[int, int]) -> np.ndarray:
        return self.vectors[outcome_index(*outcome)]


@dataclass(frozen=True, eq=False)
class JointPovm:
    eta: EtaVectors
    effects: np.ndarray

    def __post_init__(self):
        effects = np.asarray(self.effects, dtype=complex)
        if effects.shape != (4, 2, 2):
            raise InvalidInputError(f"Need four 2x2 effects, got shape {effects.shape}")
        for effect in effects:
            if not np.allclose(effect, effect.conj().T, rtol=0, atol=1e-12):
                raise InvalidInputError("Effect is not Hermitian")
            if np.linalg.eigvalsh(effect).min() < -1e-12:
                raise InvalidInputError("Effect is not positive semidefinite")
        if not np.allclose(effects.sum(axis=0), SIGMA_0, rtol=0, atol=1e-12):
            raise InvalidInputError("Effects do not sum to the identity")
        object.__setattr__(self, "effects", _frozen(effects))

    @property
    def strength(self) -> Optional[float]:
        return self.eta.strength

    def effect(self, x: int, y: int) -> np.ndarray:
        return self.effects[outcome_index(x, y)]


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probabilities over OUTCOMES; tiny negative rounding is clamped to zero.

    deviation is p - 1/4, exact when built from a state with from_deviation
    and derived from probs otherwise.
    """
    probs: np.ndarray
    deviation: Optional[np.ndarray] = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        if probs.shape != (4,):
            raise InvalidInputError(f"Joint distribution needs 4 entries, got {probs.size}")
        if not np.all(np.isfinite(probs)):
            raise InvalidInputError("Joint distribution entries must be finite")
        if probs.min() < -settings.probability_clamp:
            raise InvalidInputError(f"Negative probability {probs.min():.3g} in observed statistics")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1) > 1e-12:
            raise InvalidInputError(f"Joint distribution sums to {probs.sum():.15g}, expected 1")

        if self.deviation is None:
            deviation = probs - 0.25
        else:
            deviation = np.asarray(self.deviation, dtype=float).ravel()
            if deviation.shape != (4,) or np.abs(probs - 0.25 - deviation).max() > 1e-12:
                raise InvalidInputError("Deviation from uniform does not match the probabilities")

        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "deviation", _frozen(deviation))

    @classmethod
    def from_deviation(cls, deviation) -> "JointDistribution":
        deviation = np.asarray(deviation, dtype=float).ravel()
        return cls(0.25 + deviation, deviation=deviation)

    @classmethod
    def from_counts(cls, counts) -> "JointDistribution":
        counts = np.asarray(counts, dtype=float).ravel()
        total = counts.sum()
        if total <= 0:
            raise InvalidInputError("Counts must contain at least one event")
        return cls(counts / total)

    def __getitem__(self, outcome: tuple[int, int]) -> float:
        return float(self.probs[outcome_index(*outcome)])

    def as_matrix(self) -> np.ndarray:
        """2x2 array indexed [x, y] with +1 first."""
        return self.probs.reshape(2, 2)

    def deviation_matrix(self) -> np.ndarray:
        return self.deviation.reshape(2, 2)


class Marginals(NamedTuple):
    """Two-outcome distributions of X and Y, ordered (+1, -1)."""
    x: np.ndarray
    y: np.ndarray


def povm_from_eta_vectors(eta: EtaVectors) -> JointPovm:
    """Effects (sigma_0 + eta(x, y) . sigma) / 4 for any admissible vectors."""
    effects = [0.25 * (SIGMA_0 + np.tensordot(v, PAULI, axes=1)) for v in eta.vectors]
    return JointPovm(eta=eta, effects=np.array(effects))


def build_povm(eta: float) -> JointPovm:
    return povm_from_eta_vectors(EtaVectors.standard(eta))


def observed_joint(s: BlochVector, povm: JointPovm) -> JointDistribution:
    """p(x, y) = (1 + eta(x, y) . s) / 4."""
    return JointDistribution.from_deviation(0.25 * (povm.eta.vectors @ s.as_array()))


def observed_joint_from_trace(rho: DensityMatrix2, povm: JointPovm) -> JointDistribution:
    """p(x, y) = tr[rho Delta(x, y)] with explicit matrices."""
    probs = [np.trace(rho.matrix @ effect).real for effect in povm.effects]
    return JointDistribution(np.array(probs))


def observed_marginals(p_tilde: JointDistribution) -> Marginals:
    table = p_tilde.as_matrix()
    return Marginals(x=table.sum(axis=1), y=table.sum(axis=0))


def exact_marginals(s: BlochVector) -> Marginals:
    """Statistics of X = sigma_x and Y = sigma_y in the state s."""
    signs = np.array(OUTCOME_VALUES, dtype=float)
    return Marginals(x=0.5 * (1 + signs * s.x), y=0.5 * (1 + signs * s.y))
