"""
Analysis Service - error metrics, rate curves, lower-bound constructions and
the flatness witness check
"""
from typing import Optional, Union
import math
import logging

import numpy as np
import scipy.linalg

from config.settings import settings
from core.arrangements import identity_permutation
from core.instances import make_rng
from core.linalg import svd, range_basis
from core.matrix import as_matrix
from models.schemas import (
    Instance,
    RateParams,
    FlatnessResult,
    FlatnessVerdict,
    ObservationModel,
)
from models.errors import DimensionMismatch, RankTooLarge, InvalidGamma, InvalidSeparation

logger = logging.getLogger(__name__)

# Prediction error floor of the SVT lower-bound construction at sigma = 1:
# the smaller of (1/sqrt(2) - 2/3)^2 ~ 0.00163 (threshold above the flat
# spectrum) and r (n + m) / (36 n m) ~ 0.00694 at n = m = 64, r = 8.
SVT_ADVERSARIAL_FLOOR = 0.0016


def normalized_prediction_error(y_hat, y_star) -> float:
    """(1 / nm) ||Y_hat - Y*||_F^2"""
    y_hat = as_matrix(y_hat, "y_hat")
    y_star = as_matrix(y_star, "y_star")
    if y_hat.shape != y_star.shape:
        raise DimensionMismatch(f"y_hat {y_hat.shape} vs y_star {y_star.shape}")
    if y_hat.size == 0:
        return 0.0
    diff = y_hat - y_star
    return float(np.sum(diff * diff) / diff.size)


def rate_mle(p: RateParams) -> float:
    """sigma^2 (rank(A)/n + min(log n, m)/m)"""
    return p.sigma ** 2 * (p.rank_a / p.n + min(math.log(p.n), p.m) / p.m)


def rate_svt(p: RateParams) -> float:
    """sigma^2 rank(A) (1/n + 1/m); shared by the square-root LASSO"""
    return p.sigma ** 2 * p.rank_a * (1.0 / p.n + 1.0 / p.m)


def svt_threshold_dominates_noise(w, lam: float) -> bool:
    """lam >= ||W||_op, the event on which thresholding removes all pure noise."""
    w = as_matrix(w, "w")
    if w.size == 0:
        return True
    return lam >= float(np.linalg.norm(w, 2))


def srlasso_tuning_condition(w, lam: float) -> bool:
    """lam >= 2 ||W||_op / ||W||_F, under which the square-root LASSO error
    concentrates on the row space of the signal."""
    w = as_matrix(w, "w")
    fro = float(np.linalg.norm(w))
    if fro == 0.0:
        return True
    return lam >= 2.0 * float(np.linalg.norm(w, 2)) / fro


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rows x cols matrix with orthonormal columns."""
    q, r = scipy.linalg.qr(rng.standard_normal((rows, cols)), mode="economic")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def svt_adversarial_instance(a, sigma: float, seed: int, m: Optional[int] = None) -> Instance:
    """Instance whose noiseless matrix has all rank(A) singular values equal to
    sigma (sqrt(n) + sqrt(m)) / 6, sitting where no threshold level separates
    signal from noise."""
    a = as_matrix(a, "a")
    n = a.shape[0]
    m = n if m is None else int(m)
    factors = svd(a)
    r = factors.rank
    if r > m:
        raise RankTooLarge(f"rank(A)={r} exceeds m={m}")

    rng = make_rng(seed)
    level = sigma * (math.sqrt(n) + math.sqrt(m)) / 6.0
    v = random_orthonormal(m, r, rng)
    # X0 = V_A Sigma_A^{-1} L V^T so that A X0 = U_A L V^T
    x_star = (factors.v / factors.singular_values) @ (level * v.T)
    y_star = a @ x_star
    y = y_star + sigma * rng.standard_normal((n, m))
    return Instance(
        a=a,
        x_star=x_star,
        arrangement=identity_permutation(n),
        sigma=float(sigma),
        y_star=y_star,
        y=y,
        seed=int(seed),
        model=ObservationModel.PERMUTATION,
    )


def flatness_index(n: int, gamma: float) -> int:
    if not 0.0 < gamma < 1.0:
        raise InvalidGamma(f"gamma must lie in (0, 1), got {gamma}")
    k = int(math.floor(gamma * n + 1e-12))
    if k < 1 or k > n - 1:
        raise InvalidGamma(f"floor(gamma * n) = {k} outside [1, {n - 1}]")
    return k


def sorted_gap(vector: np.ndarray, k: int) -> float:
    """a^s_k - a^s_{k+1} (1-based, decreasing order) of a unit-normalized vector."""
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        return 0.0
    ordered = np.sort(vector / norm)[::-1]
    return float(ordered[k - 1] - ordered[k])


def flatness_witness_check(a,
                           witness: Union[np.ndarray, str, None] = "auto",
                           gamma: float = 0.5,
                           *,
                           xi: float,
                           seed: int = 0,
                           n_random: Optional[int] = None) -> FlatnessResult:
    """Sufficient check of the (gamma, xi)-separation condition.

    Candidates are projected onto range(A) and normalized; both signs are tried.
    Reports a witness when one passes, inconclusive otherwise.
    """
    if not xi > 0.0:
        raise InvalidSeparation(f"xi must be positive, got {xi}")
    a = as_matrix(a, "a")
    n = a.shape[0]
    k = flatness_index(n, gamma)
    q = range_basis(a)

    if witness is None or isinstance(witness, str):
        n_random = settings.FLATNESS_RANDOM_WITNESSES if n_random is None else n_random
        rng = make_rng(seed)
        columns = [a[:, j] for j in range(a.shape[1])]
        randoms = list((q @ rng.standard_normal((q.shape[1], n_random))).T) if q.shape[1] else []
        candidates = columns + randoms
    else:
        candidate = np.asarray(witness, dtype=np.float64).ravel()
        if candidate.size != n:
            raise DimensionMismatch(f"witness has length {candidate.size}, expected {n}")
        candidates = [candidate]

    best_gap = 0.0
    tried = 0
    for candidate in candidates:
        projected = q @ (q.T @ candidate)
        norm = float(np.linalg.norm(projected))
        if norm <= 0.0:
            continue
        for signed in (projected / norm, -projected / norm):
            tried += 1
            gap = sorted_gap(signed, k)
            best_gap = max(best_gap, gap)
            if gap >= xi:
                return FlatnessResult(
                    verdict=FlatnessVerdict.MEMBER,
                    index=k,
                    gap=gap,
                    witness=signed,
                    candidates_tried=tried,
                )

    logger.info(f"No separating witness among {tried} candidates (best gap {best_gap:.3g}, xi {xi:.3g})")
    return FlatnessResult(
        verdict=FlatnessVerdict.INCONCLUSIVE,
        index=k,
        gap=best_gap,
        candidates_tried=tried,
    )
