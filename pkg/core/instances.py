"""
Seeded synthetic instances of the permuted and clustered linear models.

Randomness: numpy Generator over the PCG64 bit generator, normals drawn with
numpy's ziggurat sampler (stable since numpy 1.17). Draw order inside one
instance is fixed: A (if Gaussian), X*, arrangement, W.
"""
from typing import Optional, Union
import logging

import numpy as np

from core.arrangements import apply_arrangement, make_permutation, make_clustering
from core.matrix import as_matrix
from models.schemas import Instance, ObservationModel, DesignKind
from models.errors import InvalidDimensions

logger = logging.getLogger(__name__)

NORMAL_SAMPLER = "numpy.random.Generator(PCG64).standard_normal/ziggurat"

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 output step applied to x."""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master_seed: int, *indices: int) -> int:
    """Derive a 64-bit seed from a master seed and a path of indices.

    mix(s, i, j) = splitmix64(splitmix64(splitmix64(s) ^ i) ^ j)
    """
    state = splitmix64(int(master_seed) & _MASK64)
    for index in indices:
        state = splitmix64(state ^ (int(index) & _MASK64))
    return state


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def generate_instance(
    n: int,
    m: int,
    d: int,
    sigma: float,
    model: Union[ObservationModel, str] = ObservationModel.PERMUTATION,
    design: Union[DesignKind, str, np.ndarray] = DesignKind.GAUSSIAN,
    seed: int = 0,
    x_star: Optional[np.ndarray] = None,
) -> Instance:
    """Draw (A, X*, arrangement, W) and form Y = arranged(A X*) + W.

    `design` is either "gaussian" or an explicit n x d matrix. `x_star` may be
    fixed by the caller; it is drawn i.i.d. standard normal otherwise.
    """
    model = ObservationModel(model)
    if n < 1 or m < 1 or d < 0:
        raise InvalidDimensions(f"invalid dimensions n={n}, m={m}, d={d}")
    if sigma < 0 or not np.isfinite(sigma):
        raise InvalidDimensions(f"sigma must be finite and nonnegative, got {sigma}")

    rng = make_rng(seed)

    if isinstance(design, np.ndarray):
        a = as_matrix(design, "design")
        if a.shape != (n, d):
            raise InvalidDimensions(f"design has shape {a.shape}, expected ({n}, {d})")
    elif DesignKind(design) == DesignKind.GAUSSIAN:
        a = rng.standard_normal((n, d))
    else:
        raise InvalidDimensions("design 'given' requires an explicit matrix")

    if x_star is None:
        x_star = rng.standard_normal((d, m))
    else:
        x_star = as_matrix(x_star, "x_star")
        if x_star.shape != (d, m):
            raise InvalidDimensions(f"x_star has shape {x_star.shape}, expected ({d}, {m})")

    if model == ObservationModel.PERMUTATION:
        arrangement = make_permutation(rng.permutation(n))
    else:
        arrangement = make_clustering(rng.integers(0, n, size=n))

    y_star = apply_arrangement(arrangement, a @ x_star)
    noise = rng.standard_normal((n, m))
    y = y_star.copy() if sigma == 0 else y_star + sigma * noise

    return Instance(
        a=a,
        x_star=x_star,
        arrangement=arrangement,
        sigma=float(sigma),
        y_star=y_star,
        y=y,
        seed=int(seed),
        model=model,
    )
