"""
Brute-force maximum likelihood over row arrangements.

Permutation model: for a fixed permutation the inner least-squares problem
has residual ||Y||^2 - ||(Pi Q)^T Y||^2 with Q an orthonormal basis of
range(A), so Q is computed once and every permutation costs one small
contraction. Clustering model: depth-first search over all n^n maps, pruned
with the residual of the rows assigned so far (a lower bound on the full
residual).
"""
from typing import Optional, Tuple, Any
from itertools import permutations, islice
import math
import logging

import numpy as np

from config.settings import settings
from core.arrangements import apply_arrangement, make_permutation, make_clustering
from core.linalg import range_basis, least_squares
from core.matrix import as_matrix
from estimators.base_estimator import BaseEstimator
from models.schemas import DenoiseResult, EstimatorName, ObservationModel, Arrangement
from models.errors import DimensionMismatch, InstanceTooLarge

logger = logging.getLogger(__name__)


def enumeration_cap(model: ObservationModel, cap: Optional[int] = None) -> int:
    if cap is not None:
        return int(cap)
    if model == ObservationModel.PERMUTATION:
        return settings.MLE_PERMUTATION_CAP
    return settings.MLE_CLUSTERING_CAP


def nth_permutation(n: int, k: int) -> Tuple[int, ...]:
    """k-th permutation of range(n) in lexicographic order."""
    pool = list(range(n))
    out = []
    for i in range(n, 0, -1):
        block = math.factorial(i - 1)
        index, k = divmod(k, block)
        out.append(pool.pop(index))
    return tuple(out)


def _fit(a: np.ndarray, y: np.ndarray, arrangement: Arrangement):
    arranged = apply_arrangement(arrangement, a)
    x_hat = least_squares(arranged, y)
    y_hat = arranged @ x_hat
    residual = y - y_hat
    return x_hat, y_hat, float(np.sum(residual * residual))


def _best_permutation(a: np.ndarray, y: np.ndarray, batch_size: int, tie_rtol: float):
    n = y.shape[0]
    q = range_basis(a)
    y_norm2 = float(np.sum(y * y))

    chunks = []
    iterator = permutations(range(n))
    while True:
        batch = list(islice(iterator, batch_size))
        if not batch:
            break
        rows = np.asarray(batch, dtype=np.intp)
        # (Pi Q)^T Y for every permutation in the batch: k x r x m
        captured = np.einsum("kir,im->krm", q[rows], y)
        chunks.append(y_norm2 - np.sum(captured * captured, axis=(1, 2)))

    objectives = np.concatenate(chunks)
    best = float(objectives.min())
    tol = tie_rtol * max(abs(best), y_norm2)
    index = int(np.argmax(objectives <= best + tol))
    return nth_permutation(n, index), objectives.size


def _best_clustering(a: np.ndarray, y: np.ndarray, tie_rtol: float):
    n = y.shape[0]
    y_norm2 = float(np.sum(y * y))
    tol = tie_rtol * max(y_norm2, np.finfo(float).tiny)

    best_obj = math.inf
    best_map: Optional[Tuple[int, ...]] = None
    visited = 0
    pruned = 0
    current = [0] * n

    def partial_residual(depth: int) -> float:
        sub_a = a[current[:depth]]
        sub_y = y[:depth]
        if sub_a.shape[1] == 0:
            return float(np.sum(sub_y * sub_y))
        x, *_ = np.linalg.lstsq(sub_a, sub_y, rcond=None)
        r = sub_y - sub_a @ x
        return float(np.sum(r * r))

    def search(depth: int) -> None:
        nonlocal best_obj, best_map, visited, pruned
        for source in range(n):
            current[depth] = source
            visited += 1
            bound = partial_residual(depth + 1)
            if bound >= best_obj - tol:
                pruned += 1
                continue
            if depth + 1 == n:
                best_obj = bound
                best_map = tuple(current)
            else:
                search(depth + 1)

    search(0)
    return best_map, visited, pruned


def mle_denoise(a, y,
                model: ObservationModel = ObservationModel.PERMUTATION,
                cap: Optional[int] = None,
                batch_size: Optional[int] = None,
                tie_rtol: Optional[float] = None) -> DenoiseResult:
    """Global minimizer of ||Y - Pi A X||_F^2 over arrangements Pi and X."""
    a = as_matrix(a, "a")
    y = as_matrix(y, "y", allow_empty=False)
    model = ObservationModel(model)
    n = y.shape[0]
    if a.shape[0] != n:
        raise DimensionMismatch(f"a has {a.shape[0]} rows but y has {n}")

    limit = enumeration_cap(model, cap)
    if n > limit:
        raise InstanceTooLarge(n, limit, model.value)

    batch_size = batch_size or settings.MLE_BATCH_SIZE
    tie_rtol = settings.MLE_TIE_RTOL if tie_rtol is None else tie_rtol

    if model == ObservationModel.PERMUTATION:
        mapping, enumerated = _best_permutation(a, y, batch_size, tie_rtol)
        arrangement = make_permutation(mapping)
        diagnostics = {"arrangements_enumerated": enumerated}
    else:
        mapping, visited, pruned = _best_clustering(a, y, tie_rtol)
        arrangement = make_clustering(mapping)
        diagnostics = {"nodes_visited": visited, "nodes_pruned": pruned}

    x_hat, y_hat, objective = _fit(a, y, arrangement)
    logger.debug(f"MLE ({model.value}) n={n}: objective {objective:.6g}")
    return DenoiseResult(
        y_hat=y_hat,
        arrangement_hat=arrangement,
        x_hat=x_hat,
        objective=objective,
        diagnostics={**diagnostics, "model": model.value, "cap": limit},
    )


class MleEstimator(BaseEstimator):
    def __init__(self):
        super().__init__(
            name=EstimatorName.MLE,
            description="Exhaustive maximum likelihood over arrangements with least-squares inner fit",
            requires_design=True,
            requires_sigma=False,
            returns_arrangement=True,
        )

    def denoise(self, y, a=None, sigma=None, model=ObservationModel.PERMUTATION, **params: Any):
        if a is None:
            raise DimensionMismatch("mle requires the design matrix a")
        return mle_denoise(a, y, model=model, cap=params.get("cap"))

    def inapplicable_reason(self, n, sigma, model, **params):
        limit = enumeration_cap(ObservationModel(model), params.get("cap"))
        if n > limit:
            return "instance_too_large"
        return None
