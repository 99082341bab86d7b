from itertools import permutations, product
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from core.arrangements import apply_arrangement, make_permutation
from core.instances import generate_instance, make_rng
from estimators.estimator_orchestrator import estimator_orchestrator
from estimators.levsort_estimator import leverage_scores, levsort, match_by_sorting
from estimators.mle_estimator import mle_denoise, nth_permutation
from estimators.sqrt_lasso_estimator import (
    default_lambda,
    sqrt_lasso_denoise,
    sqrt_lasso_objective,
)
from estimators.svt_estimator import svt_denoise, svt_level, svt_threshold
from models.errors import (
    ConfigurationError,
    DegenerateLeverage,
    DimensionMismatch,
    InstanceTooLarge,
)
from models.schemas import EstimatorName, ObservationModel
from services.analysis_service import random_orthonormal

from helpers import orthonormal_columns, rank_r_matrix


def _lstsq_residual(a: np.ndarray, y: np.ndarray) -> float:
    x, *_ = np.linalg.lstsq(a, y, rcond=None)
    r = y - a @ x
    return float(np.sum(r * r))


def _naive_permutation_mle(a, y) -> float:
    return min(_lstsq_residual(a[list(p)], y) for p in permutations(range(y.shape[0])))


def _naive_clustering_mle(a, y) -> float:
    n = y.shape[0]
    return min(_lstsq_residual(a[list(p)], y) for p in product(range(n), repeat=n))


# -- brute-force MLE ---------------------------------------------------------

def test_nth_permutation_follows_lexicographic_order():
    assert [nth_permutation(4, k) for k in range(24)] == list(permutations(range(4)))


def test_mle_noiseless_recovers_arrangement():
    instance = generate_instance(6, 3, 2, 0.0, seed=11)
    result = mle_denoise(instance.a, instance.y)
    assert result.arrangement_hat == instance.arrangement
    assert result.objective <= 1e-20 * float(np.sum(instance.y ** 2)) + 1e-24
    np.testing.assert_allclose(result.y_hat, instance.y, atol=1e-9)
    np.testing.assert_allclose(result.x_hat, instance.x_star, atol=1e-9)


@pytest.mark.parametrize("seed", range(8))
def test_mle_matches_naive_enumeration(seed):
    instance = generate_instance(5, 3, 2, 0.7, seed=seed)
    result = mle_denoise(instance.a, instance.y)
    expected = _naive_permutation_mle(np.asarray(instance.a), np.asarray(instance.y))
    assert result.objective == pytest.approx(expected, rel=1e-9, abs=1e-12)
    assert result.diagnostics["arrangements_enumerated"] == 120


@pytest.mark.parametrize("seed", range(6))
def test_mle_objective_below_noise_energy(seed):
    instance = generate_instance(6, 4, 2, 1.0, seed=100 + seed)
    result = mle_denoise(instance.a, instance.y)
    noise_energy = float(np.sum(instance.noise ** 2))
    assert result.objective <= noise_energy * (1 + 1e-9)


def test_mle_small_batches_give_same_answer():
    instance = generate_instance(6, 2, 2, 0.5, seed=3)
    whole = mle_denoise(instance.a, instance.y)
    batched = mle_denoise(instance.a, instance.y, batch_size=7)
    assert whole.arrangement_hat == batched.arrangement_hat
    assert whole.objective == pytest.approx(batched.objective, rel=1e-12)


def test_mle_ties_resolve_to_lexicographically_smallest():
    a = np.ones((3, 1))
    y = np.array([[1.0], [2.0], [4.0]])
    result = mle_denoise(a, y)
    assert result.arrangement_hat.map == (0, 1, 2)


def test_mle_single_row():
    a = np.array([[2.0, 0.0]])
    y = np.array([[4.0, 6.0]])
    result = mle_denoise(a, y)
    assert result.arrangement_hat.map == (0,)
    np.testing.assert_allclose(result.y_hat, y)


def test_mle_rejects_instances_above_cap():
    instance = generate_instance(10, 2, 1, 1.0, seed=0)
    with pytest.raises(InstanceTooLarge) as info:
        mle_denoise(instance.a, instance.y)
    assert info.value.n == 10 and info.value.cap == 9
    with pytest.raises(InstanceTooLarge):
        mle_denoise(instance.a[:5], instance.y[:5], cap=4)


def test_mle_row_mismatch():
    with pytest.raises(DimensionMismatch):
        mle_denoise(np.zeros((3, 1)), np.zeros((4, 1)))


@pytest.mark.parametrize("seed", range(5))
def test_clustering_mle_matches_naive_enumeration(seed):
    instance = generate_instance(4, 2, 1, 0.5, model=ObservationModel.CLUSTERING, seed=seed)
    result = mle_denoise(instance.a, instance.y, model=ObservationModel.CLUSTERING)
    expected = _naive_clustering_mle(np.asarray(instance.a), np.asarray(instance.y))
    assert result.objective == pytest.approx(expected, rel=1e-9, abs=1e-12)
    assert result.diagnostics["nodes_pruned"] >= 0


def test_clustering_mle_not_worse_than_permutation_mle():
    instance = generate_instance(5, 2, 2, 1.0, seed=21)
    perm = mle_denoise(instance.a, instance.y)
    clus = mle_denoise(instance.a, instance.y, model=ObservationModel.CLUSTERING)
    assert clus.objective <= perm.objective * (1 + 1e-9) + 1e-12


def test_clustering_cap_is_separate():
    instance = generate_instance(7, 2, 1, 1.0, model=ObservationModel.CLUSTERING, seed=0)
    with pytest.raises(InstanceTooLarge):
        mle_denoise(instance.a, instance.y, model=ObservationModel.CLUSTERING)


# -- singular value thresholding ---------------------------------------------

def test_svt_threshold_examples(rng):
    np.testing.assert_allclose(svt_threshold(np.diag([3.0, 1.0]), 2.0), np.diag([3.0, 0.0]), atol=1e-12)
    m = rng.standard_normal((5, 4))
    np.testing.assert_allclose(svt_threshold(m, 0.0), m, atol=1e-12)
    low_rank = rank_r_matrix(20, 5, [9.0, 5.0], rng)
    np.testing.assert_allclose(svt_threshold(low_rank, 4.0), low_rank, atol=1e-10)


def test_svt_keeps_values_equal_to_threshold():
    np.testing.assert_allclose(svt_threshold(np.diag([2.0, 1.0]), 2.0), np.diag([2.0, 0.0]), atol=1e-12)


def test_svt_above_top_singular_value_is_zero(rng):
    m = rng.standard_normal((6, 3))
    top = np.linalg.norm(m, 2)
    assert not np.any(svt_threshold(m, top * 1.01))


def test_svt_is_idempotent(rng):
    m = rng.standard_normal((8, 6))
    s = np.linalg.svd(m, compute_uv=False)
    lam = 0.5 * (s[2] + s[3])
    once = svt_threshold(m, lam)
    np.testing.assert_allclose(svt_threshold(once, lam), once, atol=1e-10)
    assert np.linalg.matrix_rank(once) == 3


def test_svt_is_orthogonally_equivariant(rng):
    m = rng.standard_normal((7, 5))
    s = np.linalg.svd(m, compute_uv=False)
    lam = 0.5 * (s[1] + s[2])
    q = random_orthonormal(7, 7, rng)
    r = random_orthonormal(5, 5, rng)
    np.testing.assert_allclose(svt_threshold(q @ m @ r, lam), q @ svt_threshold(m, lam) @ r, atol=1e-10)


def test_svt_retains_subset_of_spectrum(rng):
    m = rng.standard_normal((9, 6))
    s = np.linalg.svd(m, compute_uv=False)
    out = np.linalg.svd(svt_threshold(m, float(np.median(s))), compute_uv=False)
    kept = out[out > 1e-10]
    for value in kept:
        assert np.min(np.abs(s - value)) <= 1e-10
    assert kept.size <= s.size


def test_svt_negative_threshold_rejected():
    with pytest.raises(ConfigurationError):
        svt_threshold(np.eye(2), -1.0)


def test_svt_denoise_level_and_zero_input():
    result = svt_denoise(np.zeros((16, 9)), sigma=1.0)
    assert not np.any(result.y_hat)
    assert result.diagnostics["lambda"] == pytest.approx(1.1 * (4.0 + 3.0))
    assert result.diagnostics["retained_rank"] == 0
    assert svt_level(16, 9, 2.0) == pytest.approx(2.2 * 7.0)


@pytest.mark.parametrize("sigma", [0.0, -1.0, None])
def test_svt_denoise_requires_positive_sigma(sigma):
    with pytest.raises(ConfigurationError):
        svt_denoise(np.eye(3), sigma=sigma)


# -- square-root LASSO -------------------------------------------------------

def _perspective_oracle(y: np.ndarray, lam: float) -> float:
    """min over tau > 0 of min_Y' ||Y - Y'||^2 / (2 tau) + tau / 2 + lam ||Y'||_*

    The inner problem is solved by soft-thresholding at lam * tau; the outer
    one is a one-dimensional convex search.
    """
    s = np.linalg.svd(y, compute_uv=False)
    fro = float(np.linalg.norm(s))

    def inner(tau: float) -> float:
        level = lam * tau
        return (float(np.sum(np.minimum(s, level) ** 2)) / (2 * tau)
                + tau / 2 + lam * float(np.sum(np.maximum(s - level, 0.0))))

    found = minimize_scalar(inner, bounds=(1e-12, 2 * fro), method="bounded",
                            options={"xatol": 1e-13, "maxiter": 2000})
    return min(float(found.fun), lam * float(np.sum(s)))


def test_sqrt_lasso_large_lambda_returns_zero():
    result = sqrt_lasso_denoise(np.diag([4.0, 3.0]), lam=0.8)
    np.testing.assert_allclose(result.y_hat, np.zeros((2, 2)), atol=1e-12)
    assert result.objective == pytest.approx(5.0, rel=1e-12)
    assert result.diagnostics["residual_radius"] == pytest.approx(5.0, rel=1e-12)


def test_sqrt_lasso_single_active_direction():
    y = np.diag([10.0, 1.0, 1.0, 1.0, 1.0])
    result = sqrt_lasso_denoise(y, lam=0.5)
    expected = np.zeros((5, 5))
    expected[0, 0] = 10.0 - 2.0 / math.sqrt(3.0)
    np.testing.assert_allclose(result.y_hat, expected, atol=1e-10)
    assert result.diagnostics["active_set"] == [0]
    assert result.diagnostics["residual_radius"] == pytest.approx(4.0 / math.sqrt(3.0), rel=1e-12)
    assert result.objective == pytest.approx(4.0 / math.sqrt(3.0) + 0.5 * expected[0, 0], rel=1e-12)


def test_sqrt_lasso_zero_input():
    result = sqrt_lasso_denoise(np.zeros((4, 3)))
    assert not np.any(result.y_hat)
    assert result.objective == 0.0


def test_sqrt_lasso_default_lambda():
    assert default_lambda(64, 64) == pytest.approx(2.1 * 0.25)
    result = sqrt_lasso_denoise(np.eye(4)[:, :3] * 5.0)
    assert result.diagnostics["lambda"] == pytest.approx(2.1 * (0.5 + 1.0 / math.sqrt(3.0)))


@pytest.mark.parametrize("seed", range(10))
def test_sqrt_lasso_matches_perspective_oracle(seed):
    rng = make_rng(seed)
    y = rank_r_matrix(12, 8, [20.0, 9.0], rng) + rng.standard_normal((12, 8))
    lam = [0.05, 0.2, 0.4, 0.6, 1.0][seed % 5]
    result = sqrt_lasso_denoise(y, lam=lam)
    oracle = _perspective_oracle(y, lam)
    assert result.objective == pytest.approx(oracle, rel=1e-6)
    assert result.objective <= oracle * (1 + 1e-9)
    assert sqrt_lasso_objective(y, result.y_hat, lam) == pytest.approx(result.objective, rel=1e-9)


def test_sqrt_lasso_optimality_certificate(rng):
    y = rank_r_matrix(10, 7, [15.0, 6.0, 2.0], rng) + 0.5 * rng.standard_normal((10, 7))
    lam = 0.35
    result = sqrt_lasso_denoise(y, lam=lam)
    best = result.objective
    slack = 1e-10 * max(best, 1.0)
    assert best <= sqrt_lasso_objective(y, y, lam) + slack
    assert best <= sqrt_lasso_objective(y, np.zeros_like(y), lam) + slack
    for _ in range(64):
        delta = rng.standard_normal((10, 1)) @ rng.standard_normal((1, 7))
        for eps in (1e-3, 1e-1):
            assert best <= sqrt_lasso_objective(y, result.y_hat + eps * delta, lam) + slack


def test_sqrt_lasso_is_scale_equivariant(rng):
    y = rank_r_matrix(9, 6, [8.0, 3.0], rng) + 0.3 * rng.standard_normal((9, 6))
    base = sqrt_lasso_denoise(y, lam=0.4)
    scaled = sqrt_lasso_denoise(3.5 * y, lam=0.4)
    np.testing.assert_allclose(scaled.y_hat, 3.5 * base.y_hat, atol=1e-9)


def test_sqrt_lasso_rejects_nonpositive_lambda():
    with pytest.raises(ConfigurationError):
        sqrt_lasso_denoise(np.eye(3), lam=0.0)


# -- leverage scores and LevSort ---------------------------------------------

def test_leverage_scores_examples():
    coordinate = leverage_scores(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    np.testing.assert_allclose(coordinate.scores, [1.0, 1.0, 0.0], atol=1e-12)
    assert coordinate.rank == 2
    even = leverage_scores(np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    np.testing.assert_allclose(even.scores, [2 / 3, 2 / 3, 2 / 3], atol=1e-12)


def test_leverage_scores_of_zero_matrix():
    scores = leverage_scores(np.zeros((4, 2)))
    assert scores.rank == 0
    np.testing.assert_array_equal(scores.scores, np.zeros(4))


def test_leverage_scores_invariants(rng):
    a = rng.standard_normal((10, 3))
    base = leverage_scores(a)
    assert float(np.sum(base.scores)) == pytest.approx(3.0, rel=1e-10)
    assert np.all(base.scores >= -1e-12) and np.all(base.scores <= 1 + 1e-12)
    mixed = leverage_scores(a @ rng.standard_normal((3, 3)))
    np.testing.assert_allclose(mixed.scores, base.scores, atol=1e-10)
    p = make_permutation(rng.permutation(10))
    permuted = leverage_scores(apply_arrangement(p, a))
    np.testing.assert_allclose(permuted.scores, apply_arrangement(p, base.scores), atol=1e-10)


def test_match_by_sorting_pairs_ranks():
    mapping = match_by_sorting(np.array([0.1, 0.9, 0.5]), np.array([0.5, 0.1, 0.9]))
    assert list(mapping) == [1, 2, 0]


def test_levsort_recovers_fixture_correspondence(fixtures_dir):
    source = np.loadtxt(fixtures_dir / "keypoints_source.txt", delimiter=",")
    target = np.loadtxt(fixtures_dir / "keypoints_target.txt", delimiter=",")
    result = levsort(source, target)
    assert result.arrangement_hat.map == (3, 0, 5, 1, 4, 2)
    np.testing.assert_allclose(result.x_hat, [[2.0, 1.0], [1.0, 3.0]], atol=1e-10)
    assert result.diagnostics["preconditions_met"]


def test_levsort_exact_on_orthonormal_design(rng):
    a = orthonormal_columns(8, 2, rng)
    p = make_permutation(rng.permutation(8))
    result = levsort(a, apply_arrangement(p, a))
    assert result.arrangement_hat == p
    np.testing.assert_allclose(result.x_hat, np.eye(2), atol=1e-10)


def test_levsort_flags_noisy_input():
    instance = generate_instance(30, 2, 2, 0.05, seed=4)
    result = levsort(instance.a, instance.y)
    assert not result.diagnostics["preconditions_met"]
    assert result.diagnostics["leverage_residual"] > 1e-8


def test_levsort_warns_on_tied_leverage():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.warns(DegenerateLeverage):
        result = levsort(a, a)
    assert result.diagnostics["degenerate_leverage"]
    assert not result.diagnostics["preconditions_met"]


def test_levsort_row_mismatch():
    with pytest.raises(DimensionMismatch):
        levsort(np.zeros((3, 2)), np.zeros((4, 2)))


# -- orchestrator ------------------------------------------------------------

def test_orchestrator_registry():
    described = estimator_orchestrator.describe()
    assert set(described) == {"mle", "svt", "srlasso", "levsort"}
    assert described["levsort"]["models"] == ["permutation"]
    assert described["svt"]["requires_sigma"]
    with pytest.raises(ConfigurationError):
        estimator_orchestrator.get("lasso")


def test_orchestrator_skip_reasons():
    assert estimator_orchestrator.skip_reason("svt", 10, None, "permutation") == "sigma_required"
    assert estimator_orchestrator.skip_reason("svt", 10, 0.0, "permutation") == "sigma_required"
    assert estimator_orchestrator.skip_reason("mle", 10, 1.0, "permutation") == "instance_too_large"
    assert estimator_orchestrator.skip_reason("mle", 10, 1.0, "permutation", cap=10) is None
    assert estimator_orchestrator.skip_reason(EstimatorName.SRLASSO, 500, None, "clustering") is None


def test_orchestrator_run_records_wall_time():
    instance = generate_instance(20, 5, 2, 1.0, seed=8)
    result = estimator_orchestrator.run("svt", instance.y, sigma=1.0)
    assert result.diagnostics["wall_time_ms"] >= 0.0
    assert "lambda" in result.diagnostics
