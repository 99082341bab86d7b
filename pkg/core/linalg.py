"""
Reduced SVD, pseudoinverse and least-squares residuals
"""
from typing import Optional
import logging

import numpy as np
import scipy.linalg

from config.settings import settings
from core.matrix import as_matrix
from models.schemas import SvdFactors
from models.errors import ConvergenceFailure, DimensionMismatch

logger = logging.getLogger(__name__)


def _raw_svd(m: np.ndarray):
    drivers = [settings.SVD_DRIVER] + [d for d in ("gesdd", "gesvd") if d != settings.SVD_DRIVER]
    last_error = None
    for driver in drivers:
        try:
            return scipy.linalg.svd(m, full_matrices=False, lapack_driver=driver, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.warning(f"SVD driver {driver} failed on {m.shape[0]}x{m.shape[1]} input: {e}")
            last_error = e
    raise ConvergenceFailure(f"SVD did not converge: {last_error}")


def svd(m, rank_tol: Optional[float] = None) -> SvdFactors:
    """Reduced SVD keeping singular values strictly above rank_tol * sigma_1."""
    m = as_matrix(m)
    tol = settings.RANK_TOL if rank_tol is None else float(rank_tol)
    n_rows, n_cols = m.shape

    if m.size == 0 or not np.any(m):
        return SvdFactors(
            u=np.zeros((n_rows, 0)),
            singular_values=np.zeros(0),
            v=np.zeros((n_cols, 0)),
            rank_tol=tol,
        )

    u, s, vt = _raw_svd(m)
    keep = s > tol * s[0]
    # LAPACK already returns nonincreasing values; keep is a prefix
    r = int(np.count_nonzero(keep))
    return SvdFactors(u=u[:, :r], singular_values=s[:r], v=vt[:r].T, rank_tol=tol)


def numerical_rank(m, rank_tol: Optional[float] = None) -> int:
    return svd(m, rank_tol).rank


def pseudo_inverse(m, rank_tol: Optional[float] = None) -> np.ndarray:
    factors = svd(m, rank_tol)
    return (factors.v / factors.singular_values) @ factors.u.T


def range_basis(a, rank_tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of range(a) (n x rank)."""
    return svd(a, rank_tol).u


def projection_residual(a, y, rank_tol: Optional[float] = None) -> float:
    """||Y - A A^+ Y||_F^2, the least-squares residual of fitting Y by A X."""
    a = as_matrix(a, "a")
    y = as_matrix(y, "y")
    if a.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"a has {a.shape[0]} rows but y has {y.shape[0]}")
    q = range_basis(a, rank_tol)
    residual = y - q @ (q.T @ y)
    return float(np.sum(residual * residual))


def least_squares(a, y, rank_tol: Optional[float] = None) -> np.ndarray:
    """Minimum-norm X minimizing ||Y - A X||_F."""
    a = as_matrix(a, "a")
    y = as_matrix(y, "y")
    if a.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"a has {a.shape[0]} rows but y has {y.shape[0]}")
    return pseudo_inverse(a, rank_tol) @ y
