"""Finite-sample runs of the joint measurement and certification from counts.

Counts are drawn by inverse-CDF sampling over the fixed outcome order with
numpy's PCG64 generator, so a seed reproduces the same counts on every
platform. The retrieved quasi-distribution is linear in the frequencies,
which gives its covariance directly from the multinomial one.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from jointwitness.config import settings
from jointwitness.exceptions import InvalidInputError
from jointwitness.services.bloch import BlochVector, canonical_rotation
from jointwitness.services.inversion import (
    InversionKernel,
    QuasiDistribution,
    default_eta,
    invert_joint,
)
from jointwitness.services.measurement import (
    JointDistribution,
    build_povm,
    observed_joint,
    validate_strength,
)

logger = logging.getLogger(__name__)

COVARIANCE_MODES = ("plugin", "exact")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class ShotRecord:
    counts: np.ndarray
    n_shots: int
    seed: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).ravel()
        if counts.shape != (4,):
            raise InvalidInputError(f"Need 4 counts, got {counts.size}")
        if counts.min() < 0:
            raise InvalidInputError("Counts must be nonnegative")
        if int(counts.sum()) != self.n_shots:
            raise InvalidInputError(f"Counts sum to {counts.sum()}, expected {self.n_shots}")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_shots


@dataclass(frozen=True, eq=False)
class EstimatedQuasi:
    quasi: QuasiDistribution
    stderr: np.ndarray
    covariance: np.ndarray
    n_shots: int
    covariance_mode: str = "plugin"

    @property
    def estimates(self) -> np.ndarray:
        return self.quasi.probs


class Significance(NamedTuple):
    z_score: float
    certified: bool
    min_index: int
    min_entry: float
    stderr: float
    sigma: float
    degenerate: bool


class SampledCertification(NamedTuple):
    eta: float
    observed: JointDistribution
    record: ShotRecord
    estimate: EstimatedQuasi
    significance: Significance


def sample_counts(p_tilde: JointDistribution, n_shots: int, seed: int) -> ShotRecord:
    """Multinomial draw of n_shots outcomes, reproducible from the seed."""
    if int(n_shots) != n_shots or n_shots < 1:
        raise InvalidInputError(f"Number of shots must be a positive integer, got {n_shots}")
    n_shots = int(n_shots)

    cdf = np.cumsum(p_tilde.probs)
    cdf[-1] = 1.0
    uniforms = make_rng(seed).random(n_shots)
    # side="right" keeps zero-probability outcomes unreachable
    outcomes = np.searchsorted(cdf, uniforms, side="right")
    counts = np.bincount(outcomes, minlength=4)
    return ShotRecord(counts=counts, n_shots=n_shots, seed=seed)


def estimate_quasi(
    record: ShotRecord,
    kernel: InversionKernel,
    covariance: str = "plugin",
    p_exact: Optional[JointDistribution] = None,
    pseudocount: Optional[float] = None
) -> EstimatedQuasi:
    """Invert the empirical frequencies and propagate the multinomial covariance.

    "plugin" evaluates the covariance at the frequencies, each count raised by
    `pseudocount`; "exact" evaluates it at p_exact.
    """
    quasi = invert_joint(kernel, JointDistribution(record.frequencies))

    if covariance == "exact":
        if p_exact is None:
            raise InvalidInputError("Exact covariance needs the true observed distribution")
        freqs = p_exact.probs
        mode = "exact"
    elif covariance == "plugin":
        alpha = settings.covariance_pseudocount if pseudocount is None else pseudocount
        if alpha < 0:
            raise InvalidInputError(f"Pseudocount must be nonnegative, got {alpha}")
        freqs = (record.counts + alpha) / (record.n_shots + 4 * alpha)
        mode = f"plugin+{alpha:g}" if alpha else "plugin"
    else:
        raise InvalidInputError(f"Unknown covariance mode {covariance!r}; use one of {COVARIANCE_MODES}")

    multinomial = np.diag(freqs) - np.outer(freqs, freqs)
    k = kernel.joint_matrix
    cov = k @ multinomial @ k.T / record.n_shots
    stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    return EstimatedQuasi(
        quasi=quasi, stderr=stderr, covariance=cov, n_shots=record.n_shots, covariance_mode=mode
    )


def negativity_significance(est: EstimatedQuasi, sigma: Optional[float] = None) -> Significance:
    """z-score of the most negative entry; certified above `sigma` standard errors."""
    sigma = settings.certification_sigma if sigma is None else sigma
    index = int(np.argmin(est.estimates))
    min_entry = float(est.estimates[index])
    stderr = float(est.stderr[index])

    if stderr == 0.0:
        logger.warning("Zero standard error on the minimum entry: degenerate count vector")
        return Significance(
            z_score=0.0,
            certified=False,
            min_index=index,
            min_entry=min_entry,
            stderr=stderr,
            sigma=sigma,
            degenerate=True,
        )

    z_score = -min_entry / stderr
    return Significance(
        z_score=z_score,
        certified=min_entry < 0 and z_score > sigma,
        min_index=index,
        min_entry=min_entry,
        stderr=stderr,
        sigma=sigma,
        degenerate=False,
    )


def simulate_certification(
    s: BlochVector,
    n_shots: int,
    seed: int,
    eta: Optional[float] = None
) -> SampledCertification:
    """Sample the joint measurement of s in canonical axes and test the negativity."""
    _, canonical = canonical_rotation(s)
    if eta is None:
        # The maximally mixed state has no threshold; any strength gives uniform statistics
        eta = default_eta(canonical.z) if canonical.z > 0 else 1.0
    eta = validate_strength(eta)

    p_tilde = observed_joint(canonical, build_povm(eta))
    record = sample_counts(p_tilde, n_shots, seed)
    estimate = estimate_quasi(record, InversionKernel(eta))
    significance = negativity_significance(estimate)

    logger.info(
        f"Sampled {n_shots} shots (seed {seed}): min entry {significance.min_entry:.6g}, "
        f"z={significance.z_score:.3g}, certified={significance.certified}"
    )
    return SampledCertification(
        eta=eta,
        observed=p_tilde,
        record=record,
        estimate=estimate,
        significance=significance,
    )
