import math

import numpy as np
import pytest

from jointwitness.exceptions import InvalidInputError
from jointwitness.services.bloch import BlochVector
from jointwitness.services.inversion import InversionKernel, default_eta, find_witness, invert_joint, negativity
from jointwitness.services.measurement import OUTCOMES, JointDistribution, build_povm, observed_joint
from jointwitness.services.separability import (
    DISK_BOUND,
    HiddenVariableGrid,
    HiddenVariableModel,
    ResponseFunction,
    SeparabilityRegime,
    inverted_separable_statistics,
    max_achievable_correlation,
    moment_target,
    random_hidden_variable_model,
    separability_feasibility,
    separability_threshold,
    separable_statistics,
)

SQRT3 = math.sqrt(3)
DIAGONAL = 1 / math.sqrt(2)


@pytest.fixture(scope="module")
def grid():
    return HiddenVariableGrid.default()


def two_point_model() -> HiddenVariableModel:
    return HiddenVariableModel(
        [0.5, 0.5],
        [(DIAGONAL, DIAGONAL, 0), (-DIAGONAL, -DIAGONAL, 0)],
    )


def canonical_statistics(s_norm: float, eta: float) -> JointDistribution:
    return observed_joint(BlochVector(0, 0, s_norm), build_povm(eta))


def test_separable_statistics_known_values():
    point_on_z = HiddenVariableModel([1.0], [(0, 0, 1)])
    np.testing.assert_allclose(
        separable_statistics(point_on_z, ResponseFunction(0.8)).probs, 0.25, atol=1e-15
    )

    point_on_x = HiddenVariableModel([1.0], [(1, 0, 0)])
    np.testing.assert_allclose(
        separable_statistics(point_on_x, ResponseFunction(0.6)).probs,
        observed_joint(BlochVector(1, 0, 0), build_povm(0.6)).probs,
        atol=1e-12,
    )

    p = separable_statistics(two_point_model(), ResponseFunction(1.0))
    np.testing.assert_allclose(p.probs, [0.25 * (1 + x / 6) for x in (1, -1, -1, 1)], atol=1e-12)


def test_inverted_separable_statistics_known_values():
    point_on_x = HiddenVariableModel([1.0], [(1, 0, 0)])
    np.testing.assert_allclose(inverted_separable_statistics(point_on_x).probs, [0.5, 0.5, 0, 0], atol=1e-15)

    q = inverted_separable_statistics(two_point_model())
    np.testing.assert_allclose(q.probs, [0.25 * (1 + x / 2) for x in (1, -1, -1, 1)], atol=1e-12)
    assert q.min_entry == pytest.approx(0.125)


def test_classical_statistics_invert_to_nonnegative(rng):
    for _ in range(1000):
        model = random_hidden_variable_model(int(rng.integers(1, 11)), rng)
        eta = rng.uniform(0.05, 1.0)
        q = invert_joint(InversionKernel(eta), separable_statistics(model, ResponseFunction(eta)))
        assert q.min_entry >= -1e-12
        assert not negativity(q).nonclassical


def test_inversion_of_separable_statistics_matches_closed_form(rng):
    for _ in range(500):
        model = random_hidden_variable_model(int(rng.integers(1, 11)), rng)
        eta = rng.uniform(0.05, 1.0)
        retrieved = invert_joint(InversionKernel(eta), separable_statistics(model, ResponseFunction(eta)))
        np.testing.assert_allclose(
            retrieved.probs, inverted_separable_statistics(model).probs, rtol=0, atol=1e-12
        )


def test_uniform_statistics_have_centered_witness(grid):
    verdict = separability_feasibility(canonical_statistics(0.0, 1.0), ResponseFunction(1.0), grid)
    assert verdict.feasible
    assert verdict.regime is SeparabilityRegime.SEPARABLE
    assert len(verdict.model) == 1
    np.testing.assert_allclose(verdict.model.points[0], [0, 0, 0], atol=1e-12)
    assert verdict.residual <= 1e-9


def test_negative_quasi_distribution_is_not_separable(grid):
    verdict = separability_feasibility(canonical_statistics(1.0, 1.0), ResponseFunction(1.0), grid)
    assert not verdict.feasible
    assert verdict.regime is SeparabilityRegime.NEGATIVITY
    assert verdict.moment_target == pytest.approx(SQRT3)
    assert verdict.margin > 1e-9
    assert verdict.model is None


def test_separable_witness_reproduces_statistics(grid):
    p_tilde = canonical_statistics(0.2, 1.0)
    response = ResponseFunction(1.0)
    verdict = separability_feasibility(p_tilde, response, grid)
    assert verdict.feasible
    assert verdict.moment_target == pytest.approx(0.2 * SQRT3)
    np.testing.assert_allclose(separable_statistics(verdict.model, response).probs, p_tilde.probs, atol=1e-8)
    assert np.linalg.norm(verdict.model.points, axis=1).max() <= 1 + 1e-12


@pytest.mark.parametrize("s_norm", [0.2, 0.4, 0.6, 0.8, 1.0])
@pytest.mark.parametrize("eta", [0.2, 0.4, 0.6, 0.8, 1.0])
def test_regimes_on_canonical_grid(grid, s_norm, eta):
    target = SQRT3 * s_norm / eta
    verdict = separability_feasibility(canonical_statistics(s_norm, eta), ResponseFunction(eta), grid)
    assert verdict.moment_target == pytest.approx(target)

    if target > 1:
        assert not verdict.feasible
        assert verdict.regime is SeparabilityRegime.NEGATIVITY
    elif target > DISK_BOUND:
        assert not verdict.feasible
        assert verdict.regime is SeparabilityRegime.BEYOND_SUFFICIENT
    elif target < 0.45:
        assert verdict.feasible
        assert verdict.residual <= 1e-8


def test_max_achievable_correlation(grid):
    assert max_achievable_correlation(grid) == pytest.approx(0.5, abs=1e-9)

    axis_only = HiddenVariableGrid.from_points([(t, 0.0) for t in np.linspace(-1, 1, 21)])
    assert abs(max_achievable_correlation(axis_only)) < 1e-9

    diagonals = HiddenVariableGrid.from_points(
        [(DIAGONAL, DIAGONAL), (-DIAGONAL, -DIAGONAL), (DIAGONAL, -DIAGONAL), (-DIAGONAL, DIAGONAL)]
    )
    assert max_achievable_correlation(diagonals) == pytest.approx(0.5, abs=1e-9)


def test_separability_threshold_matches_disk_bound(grid):
    assert separability_threshold(ResponseFunction(1.0), grid) == pytest.approx(DISK_BOUND, abs=1e-4)


def test_feasibility_is_monotone_in_target(grid):
    response = ResponseFunction(0.8)
    verdicts = [
        separability_feasibility(canonical_statistics(s_norm, 0.8), response, grid).feasible
        for s_norm in np.linspace(0.0, 0.45, 10)
    ]
    first_infeasible = verdicts.index(False)
    assert not any(verdicts[first_infeasible:])


def test_grid_shape():
    grid = HiddenVariableGrid.disk(24, 48)
    assert len(grid) == 1153
    np.testing.assert_array_equal(grid.points[0], [0, 0])
    assert np.linalg.norm(grid.points, axis=1).max() <= 1 + 1e-12

    with pytest.raises(InvalidInputError):
        HiddenVariableGrid.disk(0, 8)
    with pytest.raises(InvalidInputError):
        HiddenVariableGrid.from_points([(1.0, 0.5)])


def test_moment_target():
    p_tilde = canonical_statistics(0.5, 0.8)
    assert moment_target(p_tilde, 0.8) == pytest.approx(SQRT3 * 0.5 / 0.8)


def test_model_validation():
    with pytest.raises(InvalidInputError, match="Negative"):
        HiddenVariableModel([1.5, -0.5], [(0, 0, 0), (0, 0, 0)])
    with pytest.raises(InvalidInputError, match="sum"):
        HiddenVariableModel([0.5, 0.4], [(0, 0, 0), (0, 0, 0)])
    with pytest.raises(InvalidInputError, match="unit ball"):
        HiddenVariableModel([1.0], [(1, 1, 0)])
    with pytest.raises(InvalidInputError):
        HiddenVariableModel([1.0], [(0, 0)])
    with pytest.raises(InvalidInputError):
        ResponseFunction(1.1)


SMALL_NORMS = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 3e-5, 1e-6, 1e-7, 1e-8, 1e-9]


@pytest.mark.parametrize("s_norm", SMALL_NORMS)
def test_negativity_near_the_origin_is_not_separable(grid, s_norm):
    eta = default_eta(s_norm)
    p_tilde = canonical_statistics(s_norm, eta)
    verdict = separability_feasibility(p_tilde, ResponseFunction(eta), grid)
    assert not verdict.feasible
    assert verdict.regime is SeparabilityRegime.NEGATIVITY
    assert verdict.moment_target == pytest.approx(1 / 0.9, abs=1e-9)
    assert verdict.margin > 0.1
    assert find_witness(BlochVector(0, 0, s_norm)).nonclassical


def test_weak_measurement_near_the_origin_is_separable(grid):
    eta = 1e-6
    p_tilde = canonical_statistics(1e-7, eta)
    response = ResponseFunction(eta)
    verdict = separability_feasibility(p_tilde, response, grid)
    assert verdict.feasible
    assert verdict.moment_target == pytest.approx(SQRT3 * 0.1, abs=1e-9)
    assert verdict.residual <= 1e-8
    np.testing.assert_allclose(
        response.moments(separable_statistics(verdict.model, response)),
        response.moments(p_tilde),
        atol=1e-8,
    )


def test_separable_statistics_at_small_strength(rng):
    for _ in range(100):
        model = random_hidden_variable_model(int(rng.integers(1, 6)), rng)
        eta = 10 ** rng.uniform(-9, -1)
        retrieved = invert_joint(InversionKernel(eta), separable_statistics(model, ResponseFunction(eta)))
        np.testing.assert_allclose(
            retrieved.probs, inverted_separable_statistics(model).probs, rtol=0, atol=1e-12
        )


def test_response_rows_and_moments():
    response = ResponseFunction(0.6)
    lam_x, lam_y = np.array([0.3, -0.5]), np.array([0.4, 0.1])
    rows = response.deviation_rows(lam_x, lam_y)
    for i, (x, y) in enumerate(OUTCOMES):
        np.testing.assert_allclose(
            rows[i] + 0.25, response.probability(x, lam_x) * response.probability(y, lam_y), atol=1e-15
        )

    model = HiddenVariableModel([0.25, 0.75], [(0.3, 0.4, 0), (-0.5, 0.1, 0)])
    moments = response.moments(separable_statistics(model, response))
    np.testing.assert_allclose(moments, [1.0, -0.3, 0.175, 0.25 * 0.12 - 0.75 * 0.05], atol=1e-12)
