import math

import numpy as np
import pytest

from jointwitness.exceptions import InvalidInputError
from jointwitness.services.bloch import BlochVector, bloch_to_density, random_bloch_vector
from jointwitness.services.measurement import (
    OUTCOMES,
    EtaVectors,
    JointDistribution,
    build_povm,
    exact_marginals,
    observed_joint,
    observed_joint_from_trace,
    observed_marginals,
    outcome_index,
    povm_from_eta_vectors,
)


@pytest.mark.parametrize("eta, expected", [
    (1.0, (0.0, 0.5)),
    (0.5, (0.125, 0.375)),
])
def test_effect_eigenvalues(eta, expected):
    povm = build_povm(eta)
    for effect in povm.effects:
        np.testing.assert_allclose(np.linalg.eigvalsh(effect), expected, atol=1e-12)


def test_effects_sum_to_identity():
    for eta in np.linspace(0.01, 1.0, 50):
        povm = build_povm(eta)
        np.testing.assert_allclose(povm.effects.sum(axis=0), np.eye(2), atol=1e-12)
        assert povm.strength == pytest.approx(eta)


@pytest.mark.parametrize("eta", [0.0, -0.1, 1.2, math.inf])
def test_rejects_strength_out_of_range(eta):
    with pytest.raises(InvalidInputError):
        build_povm(eta)


def test_standard_eta_vectors():
    vectors = EtaVectors.standard(0.6)
    np.testing.assert_allclose(vectors[(1, -1)], 0.6 / math.sqrt(3) * np.array([1, -1, -1]))
    np.testing.assert_allclose(np.linalg.norm(vectors.vectors, axis=1), 0.6)


def test_custom_eta_vectors():
    custom = EtaVectors(np.array([[0.5, 0, 0], [-0.5, 0, 0], [0, 0.5, 0], [0, -0.5, 0]]))
    povm = povm_from_eta_vectors(custom)
    assert povm.strength is None
    p = observed_joint(BlochVector(1, 0, 0), povm)
    np.testing.assert_allclose(p.probs, [0.375, 0.125, 0.25, 0.25], atol=1e-15)

    with pytest.raises(InvalidInputError, match="exceeds 1"):
        EtaVectors(np.array([[1.2, 0, 0], [-1.2, 0, 0], [0, 0, 0], [0, 0, 0]]))
    with pytest.raises(InvalidInputError, match="sum"):
        EtaVectors(np.array([[0.5, 0, 0], [0.5, 0, 0], [0, 0, 0], [0, 0, 0]]))


@pytest.mark.parametrize("s, eta, outcome, expected", [
    ((0, 0, 1), 1.0, (1, 1), 0.3943376),
    ((0, 0, 0), 0.37, (-1, 1), 0.25),
    ((1, 0, 0), 0.6, (1, 1), 0.3366025),
])
def test_observed_joint_known_values(s, eta, outcome, expected):
    p = observed_joint(BlochVector(*s), build_povm(eta))
    assert p[outcome] == pytest.approx(expected, abs=1e-7)


def test_closed_form_matches_trace(rng):
    for _ in range(1000):
        s = random_bloch_vector(rng)
        povm = build_povm(rng.uniform(1e-3, 1.0))
        closed = observed_joint(s, povm)
        traced = observed_joint_from_trace(bloch_to_density(s), povm)
        np.testing.assert_allclose(closed.probs, traced.probs, rtol=0, atol=1e-12)
        assert closed.probs.min() >= 0
        assert closed.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_observed_marginals():
    eta = 0.8
    p = observed_joint(BlochVector(0.5, 0, 0), build_povm(eta))
    marginals = observed_marginals(p)
    assert marginals.x[0] == pytest.approx(0.6154701, abs=1e-7)
    np.testing.assert_allclose(marginals.y, [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("s, x, y", [
    ((1, 0, 0), (1, 0), (0.5, 0.5)),
    ((0, -1, 0), (0.5, 0.5), (0, 1)),
    ((0.2, 0.4, 0.1), (0.6, 0.4), (0.7, 0.3)),
])
def test_exact_marginals(s, x, y):
    marginals = exact_marginals(BlochVector(*s))
    np.testing.assert_allclose(marginals.x, x, atol=1e-15)
    np.testing.assert_allclose(marginals.y, y, atol=1e-15)


def test_outcome_order():
    assert OUTCOMES == ((1, 1), (1, -1), (-1, 1), (-1, -1))
    assert outcome_index(-1, 1) == 2
    with pytest.raises(InvalidInputError):
        outcome_index(0, 1)


def test_joint_distribution_validation():
    clamped = JointDistribution([0.5, 0.5 + 1e-16, -1e-16, 0.0])
    assert clamped.probs.min() == 0.0

    with pytest.raises(InvalidInputError, match="Negative probability"):
        JointDistribution([0.5, 0.5 + 1e-10, -1e-10, 0.0])
    with pytest.raises(InvalidInputError, match="sums to"):
        JointDistribution([0.3, 0.3, 0.3, 0.3])
    with pytest.raises(InvalidInputError):
        JointDistribution([0.5, 0.5])


def test_joint_distribution_from_counts():
    p = JointDistribution.from_counts([4, 1, 1, 4])
    np.testing.assert_allclose(p.probs, [0.4, 0.1, 0.1, 0.4])
    np.testing.assert_allclose(p.as_matrix(), [[0.4, 0.1], [0.1, 0.4]])
    with pytest.raises(InvalidInputError):
        JointDistribution.from_counts([0, 0, 0, 0])


def test_deviation_is_carried_exactly():
    s = BlochVector(0, 0, 1e-9)
    p = observed_joint(s, build_povm(1e-9))
    k = 1e-9 / math.sqrt(3)
    np.testing.assert_allclose(p.deviation, 0.25 * k * 1e-9 * np.array([1, -1, -1, 1]), rtol=1e-12, atol=0)
    np.testing.assert_array_equal(p.probs, [0.25] * 4)

    uniform = JointDistribution([0.4, 0.1, 0.1, 0.4])
    np.testing.assert_allclose(uniform.deviation, [0.15, -0.15, -0.15, 0.15], atol=1e-15)

    with pytest.raises(InvalidInputError, match="Deviation"):
        JointDistribution([0.4, 0.1, 0.1, 0.4], deviation=[0, 0, 0, 0])
    np.testing.assert_allclose(JointDistribution.from_deviation([0.1, -0.1, 0, 0]).probs, [0.35, 0.15, 0.25, 0.25])
