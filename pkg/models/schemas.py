from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional, Dict, Any, Tuple, Union
from enum import Enum
import numpy as np

from models.errors import DuplicateIndex, OutOfRange, InvalidDimensions


class ObservationModel(str, Enum):
    PERMUTATION = "permutation"
    CLUSTERING = "clustering"


class EstimatorName(str, Enum):
    MLE = "mle"
    SVT = "svt"
    SRLASSO = "srlasso"
    LEVSORT = "levsort"


class DesignKind(str, Enum):
    GAUSSIAN = "gaussian"
    GIVEN = "given"


class FlatnessVerdict(str, Enum):
    MEMBER = "member"
    INCONCLUSIVE = "inconclusive"


def _frozen_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


class ArrayModel(BaseModel):
    """Immutable value holding numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class Permutation(BaseModel):
    """Bijective row selection: output row i takes input row map[i]"""
    model_config = ConfigDict(frozen=True)

    map: Tuple[int, ...]

    @model_validator(mode="after")
    def check_bijection(self):
        n = len(self.map)
        seen = set()
        for index in self.map:
            if index < 0 or index >= n:
                raise OutOfRange(f"index {index} outside 0..{n - 1}")
            if index in seen:
                raise DuplicateIndex(f"index {index} appears more than once")
            seen.add(index)
        return self

    @property
    def n(self) -> int:
        return len(self.map)

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.map, dtype=np.intp)


class ClusteringAssignment(BaseModel):
    """Row selection with repetition allowed (a 0/1 matrix with D1 = 1)"""
    model_config = ConfigDict(frozen=True)

    map: Tuple[int, ...]

    @model_validator(mode="after")
    def check_range(self):
        n = len(self.map)
        for index in self.map:
            if index < 0 or index >= n:
                raise OutOfRange(f"index {index} outside 0..{n - 1}")
        return self

    @property
    def n(self) -> int:
        return len(self.map)

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.map, dtype=np.intp)


Arrangement = Union[Permutation, ClusteringAssignment]


class SvdFactors(ArrayModel):
    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    rank_tol: float = Field(ge=0.0)

    @field_validator("u", "singular_values", "v", mode="before")
    @classmethod
    def freeze_arrays(cls, value):
        return _frozen_array(value)

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])


class Instance(ArrayModel):
    a: np.ndarray
    x_star: np.ndarray
    arrangement: Arrangement
    sigma: float = Field(ge=0.0)
    y_star: np.ndarray
    y: np.ndarray
    seed: int
    model: ObservationModel = ObservationModel.PERMUTATION

    @field_validator("a", "x_star", "y_star", "y", mode="before")
    @classmethod
    def freeze_arrays(cls, value):
        return _frozen_array(value)

    @property
    def noise(self) -> np.ndarray:
        return self.y - self.y_star


class DenoiseResult(ArrayModel):
    y_hat: np.ndarray
    arrangement_hat: Optional[Arrangement] = None
    x_hat: Optional[np.ndarray] = None
    objective: float
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("y_hat", mode="before")
    @classmethod
    def check_finite_y_hat(cls, value):
        arr = _frozen_array(value)
        if not np.all(np.isfinite(arr)):
            raise ValueError("y_hat contains non-finite entries")
        return arr

    @field_validator("x_hat", mode="before")
    @classmethod
    def freeze_x_hat(cls, value):
        return None if value is None else _frozen_array(value)


class LeverageScores(ArrayModel):
    scores: np.ndarray
    rank: int = Field(ge=0)

    @field_validator("scores", mode="before")
    @classmethod
    def freeze_arrays(cls, value):
        return _frozen_array(value)


class RateParams(BaseModel):
    """Dimensions entering the rate expressions; n and m may be non-integral"""
    model_config = ConfigDict(frozen=True)

    n: float = Field(gt=0)
    m: float = Field(gt=0)
    rank_a: int = Field(gt=0)
    sigma: float = Field(gt=0)

    @model_validator(mode="after")
    def check_rank_within_rows(self):
        if self.rank_a > self.n:
            raise InvalidDimensions(f"rank_a={self.rank_a} exceeds n={self.n}")
        return self


class FlatnessResult(ArrayModel):
    verdict: FlatnessVerdict
    index: int
    gap: Optional[float] = None
    witness: Optional[np.ndarray] = None
    candidates_tried: int = 0


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    cells: List[Tuple[int, int, int]]
    sigmas: List[float]
    trials: int = Field(ge=1)
    estimators: List[EstimatorName]
    model: ObservationModel = ObservationModel.PERMUTATION
    master_seed: int = 0
    mle_cap: Optional[int] = None
    workers: Optional[int] = None
    record_timing: bool = True

    @field_validator("cells")
    @classmethod
    def check_cells(cls, cells):
        if not cells:
            raise ValueError("experiment grid is empty")
        for n, m, d in cells:
            if n < 1 or m < 1 or d < 0:
                raise ValueError(f"invalid cell (n={n}, m={m}, d={d})")
        return cells

    @field_validator("sigmas")
    @classmethod
    def check_sigmas(cls, sigmas):
        if not sigmas or any(s < 0 for s in sigmas):
            raise ValueError("sigma list must be non-empty and nonnegative")
        return sigmas


class ResultRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    estimator: EstimatorName
    n: int
    m: int
    d: int
    rank_a: int
    sigma: float
    model: ObservationModel
    trial: int
    seed: int
    normalized_error: Optional[float] = None
    elapsed_ms: float = 0.0
    skip_reason: Optional[str] = None

    @property
    def skipped(self) -> bool:
        return self.skip_reason is not None


class ResultTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    records: List[ResultRecord] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def completed(self) -> List[ResultRecord]:
        return [r for r in self.records if not r.skipped]


class PointCloud(ArrayModel):
    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def check_shape(cls, value):
        arr = _frozen_array(value)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise InvalidDimensions("point cloud needs at least two coordinate columns")
        if arr.shape[0] < arr.shape[1]:
            raise InvalidDimensions(
                f"point cloud has {arr.shape[0]} points for {arr.shape[1]} columns"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidDimensions("point cloud contains non-finite entries")
        return arr


class DenoiseRequest(BaseModel):
    y: List[List[float]]
    a: Optional[List[List[float]]] = None
    estimator: EstimatorName
    sigma: Optional[float] = None
    lam: Optional[float] = None
    tie_tol: Optional[float] = None
    mle_cap: Optional[int] = None
    model: ObservationModel = ObservationModel.PERMUTATION


class DenoiseResponse(BaseModel):
    estimator: EstimatorName
    y_hat: List[List[float]]
    arrangement_hat: Optional[List[int]] = None
    x_hat: Optional[List[List[float]]] = None
    objective: float
    normalized_objective: float
    diagnostics: Dict[str, Any]


class MatchRequest(BaseModel):
    source: List[List[float]]
    target: List[List[float]]
    tie_tol: Optional[float] = None


class MatchResponse(BaseModel):
    correspondence: List[int]
    transform: List[List[float]]
    preconditions_met: bool
    warning: Optional[str] = None
    residual: float
