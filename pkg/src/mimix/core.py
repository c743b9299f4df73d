"""Data model shared by the neighbor search, estimators and benchmark code.

Discrete values are plain reals. An atom is recognised only by exact
coincidence of coordinates, never by a column type.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

WITHIN_NORMS = ("max", "euclidean")
MARGINAL_TERMS = ("log", "digamma")


class MimixError(Exception):
    """Base class for errors raised by this package."""


class DatasetError(MimixError, ValueError):
    """Malformed sample table (shape mismatch, non-finite entry, no rows)."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class ParameterError(MimixError, ValueError):
    """Estimator or generator parameter outside its documented range."""


class InvariantError(MimixError, RuntimeError):
    """An internal consistency check failed."""


def _as_table(raw: Any, name: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DatasetError(f"{name} must be a 1-D or 2-D table, got {arr.ndim} dimensions")
    if arr.shape[1] == 0:
        raise DatasetError(f"{name} has no columns")
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """N joint observations of (X, Y); each side is an ``n x dim`` float table.

    Instances are immutable: the arrays are copies flagged read-only.
    Build them with :func:`validate_dataset`.
    """

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def x_dim(self) -> int:
        return self.x.shape[1]

    @property
    def y_dim(self) -> int:
        return self.y.shape[1]

    @property
    def joint(self) -> np.ndarray:
        return np.hstack([self.x, self.y])

    def take(self, index) -> "Dataset":
        """Return the dataset restricted to (or reordered by) ``index``."""
        index = np.asarray(index)
        return validate_dataset(self.x[index], self.y[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.x.shape == other.x.shape
            and self.y.shape == other.y.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, x_dim={self.x_dim}, y_dim={self.y_dim})"


def validate_dataset(raw_x, raw_y) -> Dataset:
    """Check two sample tables and wrap them into a :class:`Dataset`.

    One-dimensional inputs are read as single columns. Raises
    :class:`DatasetError` on row-count mismatch, empty input or a
    non-finite entry (the error carries ``row`` and ``column``).
    """
    x = _as_table(raw_x, "X")
    y = _as_table(raw_y, "Y")
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise DatasetError("dataset has zero rows")
    if x.shape[0] != y.shape[0]:
        raise DatasetError(f"shape mismatch: X has {x.shape[0]} rows, Y has {y.shape[0]}")
    for name, arr, offset in (("X", x, 0), ("Y", y, x.shape[1])):
        bad = ~np.isfinite(arr)
        if bad.any():
            row, col = (int(v) for v in np.argwhere(bad)[0])
            raise DatasetError(
                f"non-finite value {float(arr[row, col])!r} in {name} at row {row}, column {col + offset}",
                row=row,
                column=col + offset,
            )
    x = np.array(x, dtype=np.float64, order="C", copy=True)
    y = np.array(y, dtype=np.float64, order="C", copy=True)
    x.flags.writeable = False
    y.flags.writeable = False
    return Dataset(x, y)


@dataclass(frozen=True)
class EstimatorConfig:
    """Parameters of the k-NN estimators.

    ``atom_tolerance`` is the distance at or below which two samples count
    as the same point; the default 0 means exact equality.

    ``marginal_term`` selects how a marginal count n enters each sample's
    term: ``"log"`` subtracts log(n + 1), ``"digamma"`` subtracts psi(n).
    The counts include the neighbor on the boundary, which makes the log
    form biased downward by roughly 1/k; the digamma form removes most of
    that bias.
    """

    k: int = 5
    within_norm: str = "max"
    atom_tolerance: float = 0.0
    marginal_term: str = "log"

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if self.within_norm not in WITHIN_NORMS:
            raise ParameterError(f"within_norm must be one of {WITHIN_NORMS}, got {self.within_norm!r}")
        if not (self.atom_tolerance >= 0 and np.isfinite(self.atom_tolerance)):
            raise ParameterError(f"atom_tolerance must be finite and >= 0, got {self.atom_tolerance!r}")
        if self.marginal_term not in MARGINAL_TERMS:
            raise ParameterError(f"marginal_term must be one of {MARGINAL_TERMS}, got {self.marginal_term!r}")

    def check_against(self, dataset: Dataset) -> None:
        if self.k >= dataset.n:
            raise ParameterError(f"k={self.k} must be smaller than the sample count n={dataset.n}")

    def to_dict(self) -> dict:
        return {"k": int(self.k), "within_norm": self.within_norm,
                "atom_tolerance": float(self.atom_tolerance), "marginal_term": self.marginal_term}


@dataclass(frozen=True)
class NeighborProfile:
    """Neighbor statistics of one sample: radius, effective k, marginal counts."""

    rho: float
    k_tilde: int
    n_x: int
    n_y: int


@dataclass(frozen=True, eq=False)
class MiEstimate:
    """An estimate in nats, with per-sample terms when the estimator has them."""

    value: float
    per_sample: np.ndarray = field(default_factory=lambda: np.empty(0))
    estimator_name: str = ""
    config: dict = field(default_factory=dict)

    @property
    def config_echo(self) -> dict:
        return self.config

    def to_dict(self, include_per_sample: bool = False) -> dict:
        out = {
            "value": float(self.value),
            "estimator": self.estimator_name,
            "config": dict(self.config),
        }
        if include_per_sample:
            out["per_sample"] = [float(v) for v in self.per_sample]
        return out

    def __float__(self) -> float:
        return float(self.value)


def config_dict(obj) -> dict:
    """Plain-dict view of a config dataclass, for echoing into results."""
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return asdict(obj)
