"""
Row arrangements: permutations and clustering assignments.

Convention used everywhere: output row i of apply_arrangement(p, M) is input
row p.map[i] of M.
"""
from typing import Sequence, Union

import numpy as np

from models.schemas import Permutation, ClusteringAssignment, Arrangement
from models.errors import DimensionMismatch


def make_permutation(mapping: Sequence[int]) -> Permutation:
    return Permutation(map=tuple(int(i) for i in mapping))


def make_clustering(mapping: Sequence[int]) -> ClusteringAssignment:
    return ClusteringAssignment(map=tuple(int(i) for i in mapping))


def identity_permutation(n: int) -> Permutation:
    return Permutation(map=tuple(range(n)))


def inverse_permutation(p: Permutation) -> Permutation:
    inverse = np.empty(p.n, dtype=np.intp)
    inverse[p.indices] = np.arange(p.n)
    return Permutation(map=tuple(int(i) for i in inverse))


def apply_arrangement(p: Arrangement, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.shape[0] != p.n:
        raise DimensionMismatch(f"arrangement of length {p.n} applied to {m.shape[0]} rows")
    return m[p.indices]


def to_matrix(p: Arrangement) -> np.ndarray:
    """0/1 matrix P with apply_arrangement(p, M) == P @ M."""
    out = np.zeros((p.n, p.n))
    out[np.arange(p.n), p.indices] = 1.0
    return out


def is_permutation(p: Union[Permutation, ClusteringAssignment]) -> bool:
    return len(set(p.map)) == p.n
