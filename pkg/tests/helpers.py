"""Matrix builders shared by the test modules"""
import numpy as np


def orthonormal_columns(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q


def rank_r_matrix(n: int, m: int, singular_values, rng: np.random.Generator) -> np.ndarray:
    """n x m matrix with exactly the given nonzero singular values"""
    s = np.asarray(singular_values, dtype=np.float64)
    u = orthonormal_columns(n, s.size, rng)
    v = orthonormal_columns(m, s.size, rng)
    return (u * s) @ v.T
