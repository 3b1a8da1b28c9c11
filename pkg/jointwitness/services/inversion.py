"""Marginal inversion and retrieval of the joint quasi-distribution.

The observed marginals of the joint measurement are noisy versions of the
sigma_x, sigma_y statistics. The kernel mu(a, a') = (1 + (sqrt(3)/eta) a a') / 2
undoes the noise exactly on each marginal; applied factor-wise to the joint
statistics it yields a normalized distribution with the right marginals that
can nevertheless be negative. Negativity certifies that the observed
statistics admit no classical joint description.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError
from jointwitness.services.bloch import BlochVector, Rotation3, canonical_rotation
from jointwitness.services.measurement import (
    OUTCOME_VALUES,
    OUTCOMES,
    SQRT3,
    JointDistribution,
    Marginals,
    build_povm,
    observed_joint,
    outcome_index,
    validate_strength,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InversionKernel:
    """mu(a, a') for strength eta.

    Defined for any eta > 0; only eta <= 1 corresponds to a physical
    measurement, which is enforced when the POVM is built. At eta = sqrt(3)
    the kernel is the identity.
    """
    strength: float

    def __post_init__(self):
        eta = float(self.strength)
        if not math.isfinite(eta) or eta <= 0:
            raise InvalidInputError(f"Kernel strength must be positive, got {eta}")
        object.__setattr__(self, "strength", eta)

    @property
    def gain(self) -> float:
        return SQRT3 / self.strength

    @property
    def matrix(self) -> np.ndarray:
        """mu[a, a'] with rows and columns ordered (+1, -1)."""
        signs = np.array(OUTCOME_VALUES, dtype=float)
        return 0.5 * (1 + self.gain * np.outer(signs, signs))

    @property
    def joint_matrix(self) -> np.ndarray:
        """mu_X (x) mu_Y acting on distributions in OUTCOMES order."""
        return np.kron(self.matrix, self.matrix)

    def mu(self, a: int, a_prime: int) -> float:
        return 0.5 * (1 + self.gain * a * a_prime)


@dataclass(frozen=True, eq=False)
class QuasiDistribution:
    """Retrieved joint distribution; normalized, entries may be negative."""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.shape != (4,):
            raise InvalidInputError(f"Quasi-distribution needs 4 entries, got {probs.size}")
        if abs(probs.sum() - 1) > 1e-12:
            raise InvalidInputError(f"Quasi-distribution sums to {probs.sum():.15g}, expected 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls) -> "QuasiDistribution":
        return cls(np.full(4, 0.25))

    def __getitem__(self, outcome: tuple[int, int]) -> float:
        return float(self.probs[outcome_index(*outcome)])

    def as_matrix(self) -> np.ndarray:
        return self.probs.reshape(2, 2)

    def marginals(self) -> Marginals:
        table = self.as_matrix()
        return Marginals(x=table.sum(axis=1), y=table.sum(axis=0))

    @property
    def min_entry(self) -> float:
        return float(self.probs.min())


class Negativity(NamedTuple):
    min_entry: float
    nonclassical: bool


class WitnessStatus(str, enum.Enum):
    NONCLASSICAL = "nonclassical"
    MAXIMALLY_MIXED = "maximally-mixed"
    ETA_ABOVE_THRESHOLD = "eta-above-threshold"


@dataclass(frozen=True, eq=False)
class WitnessReport:
    state: BlochVector
    rotation: Rotation3
    canonical: BlochVector
    eta: Optional[float]
    observed: Optional[JointDistribution]
    quasi: QuasiDistribution
    min_entry: float
    nonclassical: bool
    ratio: float
    status: WitnessStatus


def invert_marginal(kernel: InversionKernel, observed) -> np.ndarray:
    observed = np.asarray(observed, dtype=float).ravel()
    if observed.shape != (2,):
        raise InvalidInputError(f"Marginal needs 2 entries, got {observed.size}")
    if abs(observed.sum() - 1) > 1e-12:
        raise InvalidInputError(f"Marginal sums to {observed.sum():.15g}, expected 1")
    # the kernel maps uniform to uniform
    return 0.5 + kernel.matrix @ (observed - 0.5)


def invert_joint(kernel: InversionKernel, p_tilde: JointDistribution) -> QuasiDistribution:
    """p(x, y) = sum over x', y' of mu(x, x') mu(y, y') p_tilde(x', y').

    The kernel fixes the uniform distribution, so it acts on the deviation:
    p = 1/4 + mu (p_tilde - 1/4) mu^T.
    """
    mu = kernel.matrix
    return QuasiDistribution(0.25 + (mu @ p_tilde.deviation_matrix() @ mu.T).ravel())


def quasi_closed_form(s: BlochVector, eta: float) -> QuasiDistribution:
    """(1 + x s_x + y s_y + xy s_z sqrt(3)/eta) / 4 for the standard measurement."""
    gain = SQRT3 / eta
    probs = [0.25 * (1 + x * s.x + y * s.y + x * y * s.z * gain) for x, y in OUTCOMES]
    return QuasiDistribution(np.array(probs))


def negativity(q: QuasiDistribution, tolerance: Optional[float] = None) -> Negativity:
    tol = settings.negativity_tolerance if tolerance is None else tolerance
    min_entry = q.min_entry
    return Negativity(min_entry=min_entry, nonclassical=min_entry < -tol)


def negativity_threshold(s: BlochVector) -> float:
    """Critical strength sqrt(3)|s|: any eta below it makes the quasi-distribution negative."""
    return SQRT3 * s.norm


def default_eta(s_norm: float) -> float:
    """A fixed fraction of the largest admissible strength, kept below the threshold."""
    return settings.default_eta_factor * min(1.0, SQRT3 * s_norm)


def find_witness(s: BlochVector, eta_override: Optional[float] = None) -> WitnessReport:
    """Choose axes and eta for s and run measurement, inversion and negativity check."""
    rotation, canonical = canonical_rotation(s)
    s_norm = canonical.z

    if eta_override is not None:
        eta_override = validate_strength(eta_override)

    if s_norm == 0:
        logger.info("Maximally mixed state: no negativity for any measurement strength")
        return WitnessReport(
            state=s,
            rotation=rotation,
            canonical=canonical,
            eta=eta_override,
            observed=None,
            quasi=QuasiDistribution.uniform(),
            min_entry=0.25,
            nonclassical=False,
            ratio=0.0,
            status=WitnessStatus.MAXIMALLY_MIXED,
        )

    eta = eta_override if eta_override is not None else default_eta(s_norm)
    logger.info(f"Witness for |s|={s_norm:.6g} with eta={eta:.6g}")

    p_tilde = observed_joint(canonical, build_povm(eta))
    quasi = invert_joint(InversionKernel(eta), p_tilde)
    result = negativity(quasi)
    ratio = SQRT3 * s_norm / eta

    if result.nonclassical:
        status = WitnessStatus.NONCLASSICAL
    else:
        status = WitnessStatus.ETA_ABOVE_THRESHOLD
        logger.warning(
            f"eta={eta:.6g} is not below sqrt(3)|s|={SQRT3 * s_norm:.6g}; no negativity"
        )

    return WitnessReport(
        state=s,
        rotation=rotation,
        canonical=canonical,
        eta=eta,
        observed=p_tilde,
        quasi=quasi,
        min_entry=result.min_entry,
        nonclassical=result.nonclassical,
        ratio=ratio,
        status=status,
    )
