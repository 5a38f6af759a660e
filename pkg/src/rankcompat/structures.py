"""Containers shared across modules: datasets and linear risk models."""

from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np

from rankcompat.errors import DataError, DimensionMismatch, LengthMismatch


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``features`` (n x d) with one label per row.

    Labels are {0, 1} for everything except :func:`rankcompat.metrics.rbc_general`,
    which also accepts non-negative integer (ordinal) labels. Set
    ``binary=False`` to allow those.
    """

    features: np.ndarray
    labels: np.ndarray
    binary: bool = True

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got ndim={x.ndim}")
        y = np.asarray(self.labels)
        if y.ndim != 1:
            raise DataError("labels must be a vector")
        if x.shape[0] != y.shape[0]:
            raise LengthMismatch(
                f"{x.shape[0]} feature rows but {y.shape[0]} labels")
        if x.shape[0] < 1:
            raise DataError("a dataset needs at least one row")
        if not np.all(np.isfinite(x)):
            raise DataError("features must be finite")
        if y.dtype.kind == "f":
            if not np.all(np.isfinite(y)) or np.any(y != np.round(y)):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        if np.any(y < 0):
            raise DataError("labels must be non-negative")
        if self.binary and np.any(y > 1):
            raise DataError("binary labels must be 0 or 1")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.features[index], self.labels[index], self.binary)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.binary == other.binary
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels))


@dataclasses.dataclass(eq=False)
class RiskModel:
    """Logistic-regression risk model ``p = logistic(features @ weights + intercept)``."""

    weights: np.ndarray
    intercept: float = 0.0
    reg_l2: float = 0.0
    metadata: dict[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.intercept = float(self.intercept)
        self.reg_l2 = float(self.reg_l2)
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.intercept)):
            raise DataError("model parameters must be finite")
        if self.reg_l2 < 0:
            raise DataError("reg_l2 must be non-negative")

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    @property
    def params(self) -> np.ndarray:
        """Weights followed by the intercept, as one vector of length d + 1."""
        return np.append(self.weights, self.intercept)

    def check_features(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.d:
            raise DimensionMismatch(
                f"model expects {self.d} features, got {x.shape[1]}")
        return x

    def same_parameters(self, other: "RiskModel") -> bool:
        return (np.array_equal(self.weights, other.weights)
                and self.intercept == other.intercept)

    def __eq__(self, other):
        if not isinstance(other, RiskModel):
            return NotImplemented
        return (self.same_parameters(other) and self.reg_l2 == other.reg_l2
                and self.metadata == other.metadata)
