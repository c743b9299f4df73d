"""Mutual information estimators.

* :func:`estimate_mixed` handles discrete, continuous and mixed samples: at
  samples whose k-NN radius is zero the neighbor order is replaced by the
  number of coincident samples.
* :func:`estimate_ksg` is the KSG estimator in the log form, sharing the
  continuous path with the mixed estimator bit for bit.
* :func:`estimate_noisy_ksg` jitters every coordinate with Gaussian noise and
  runs KSG.
* :func:`estimate_fixed_partition` and :func:`estimate_adaptive_partition`
  are plug-in estimators on equal-width and median-split partitions.

All values are in nats and no estimate is clipped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .core import Dataset, EstimatorConfig, MiEstimate, ParameterError, validate_dataset
from .neighbors import NeighborProfiles, build_index, neighbor_profiles
from .specfun import digamma


@dataclass(frozen=True)
class PartitionConfig:
    bins_per_dim: int = 8
    significance: float = 0.05
    min_cell: int = 4

    def __post_init__(self):
        if int(self.bins_per_dim) != self.bins_per_dim or self.bins_per_dim < 2:
            raise ParameterError(f"bins_per_dim must be an integer >= 2, got {self.bins_per_dim!r}")
        if not 0 < self.significance < 1:
            raise ParameterError(f"significance must lie in (0, 1), got {self.significance!r}")
        if int(self.min_cell) != self.min_cell or self.min_cell < 1:
            raise ParameterError(f"min_cell must be an integer >= 1, got {self.min_cell!r}")

    def to_dict(self) -> dict:
        return {"bins_per_dim": int(self.bins_per_dim), "significance": float(self.significance),
                "min_cell": int(self.min_cell)}


@dataclass(frozen=True)
class NoiseConfig:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be finite and > 0, got {self.sigma!r}")

    def to_dict(self) -> dict:
        return {"sigma": float(self.sigma), "seed": int(self.seed)}


def mean_of_terms(terms: np.ndarray) -> float:
    """Correctly rounded mean; independent of term order and thread count."""
    return math.fsum(terms.tolist()) / terms.shape[0]


def xi_terms(profiles: NeighborProfiles, n: int, marginal_term: str = "log") -> np.ndarray:
    """psi(k_tilde) + log N - log(n_x + 1) - log(n_y + 1), per sample.

    With ``marginal_term="digamma"`` the marginal parts are psi(n_x) and psi(n_y).
    """
    head = digamma(profiles.k_tilde.astype(np.float64)) + math.log(n)
    if marginal_term == "digamma":
        tail = digamma(profiles.n_x.astype(np.float64)) + digamma(profiles.n_y.astype(np.float64))
    else:
        tail = np.log(profiles.n_x + 1.0) + np.log(profiles.n_y + 1.0)
    # one commutative sum keeps the terms bitwise symmetric in X and Y
    return head - tail


def _knn_estimate(dataset: Dataset, config: EstimatorConfig, detect_atoms: bool, name: str,
                  method: str) -> MiEstimate:
    oracle = build_index(dataset, config, method=method)
    profiles = neighbor_profiles(oracle, config.k, detect_atoms=detect_atoms)
    xi = xi_terms(profiles, dataset.n, config.marginal_term)
    return MiEstimate(mean_of_terms(xi), xi, name, config.to_dict())


def estimate_mixed(dataset: Dataset, config: EstimatorConfig | None = None, *,
                   method: str = "auto") -> MiEstimate:
    """Mutual information for arbitrary mixtures of discrete and continuous parts."""
    return _knn_estimate(dataset, config or EstimatorConfig(), True, "mixed", method)


def estimate_ksg(dataset: Dataset, config: EstimatorConfig | None = None, *,
                 method: str = "auto") -> MiEstimate:
    """KSG estimate; identical to :func:`estimate_mixed` minus the atom branch."""
    return _knn_estimate(dataset, config or EstimatorConfig(), False, "ksg", method)


def gaussian_noise(shape: tuple[int, int], noise: NoiseConfig) -> np.ndarray:
    """The perturbation :func:`estimate_noisy_ksg` applies, row i for sample i."""
    return np.random.default_rng(noise.seed).normal(0.0, noise.sigma, size=shape)


def add_noise(dataset: Dataset, perturbation: np.ndarray) -> Dataset:
    """Copy of ``dataset`` with ``perturbation`` (n x (x_dim + y_dim)) added."""
    dx = dataset.x_dim
    return validate_dataset(dataset.x + perturbation[:, :dx], dataset.y + perturbation[:, dx:])


def estimate_noisy_ksg(dataset: Dataset, config: EstimatorConfig | None = None,
                       noise: NoiseConfig | None = None, *, method: str = "auto") -> MiEstimate:
    if noise is None:
        raise ParameterError("estimate_noisy_ksg needs a NoiseConfig")
    config = config or EstimatorConfig()
    config.check_against(dataset)
    jitter = gaussian_noise((dataset.n, dataset.x_dim + dataset.y_dim), noise)
    est = estimate_ksg(add_noise(dataset, jitter), config, method=method)
    return MiEstimate(est.value, est.per_sample, "noisy_ksg", {**config.to_dict(), **noise.to_dict()})


def plugin_mi(x_labels: np.ndarray, y_labels: np.ndarray) -> float:
    """Plug-in MI of two label arrays (rows are labels when 2-D)."""
    x_labels = np.asarray(x_labels)
    y_labels = np.asarray(y_labels)
    n = x_labels.shape[0]
    if x_labels.ndim == 1:
        x_labels = x_labels[:, None]
    if y_labels.ndim == 1:
        y_labels = y_labels[:, None]
    _, xi, cx = np.unique(x_labels + 0, axis=0, return_inverse=True, return_counts=True)
    _, yi, cy = np.unique(y_labels + 0, axis=0, return_inverse=True, return_counts=True)
    xi, yi = xi.reshape(-1), yi.reshape(-1)
    pairs, cxy = np.unique(np.column_stack([xi, yi]), axis=0, return_counts=True)
    # integer products, so an independent cell gives log(1) = 0 exactly
    num = cxy.astype(np.int64) * n
    den = cx[pairs[:, 0]].astype(np.int64) * cy[pairs[:, 1]]
    terms = cxy * np.log(num / den)
    # mathematically >= 0; only rounding can push it below
    return max(0.0, math.fsum(terms.tolist()) / n)


def equal_width_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Per-column bin index in 0..bins-1 over [min, max]; max falls in the last bin."""
    lo = values.min(axis=0)
    width = values.max(axis=0) - lo
    safe = np.where(width > 0, width, 1.0)
    idx = np.floor((values - lo) / safe * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def estimate_fixed_partition(dataset: Dataset, part: PartitionConfig | None = None) -> MiEstimate:
    """Plug-in MI after quantizing every dimension into equal-width bins."""
    part = part or PartitionConfig()
    bx = equal_width_bins(dataset.x, part.bins_per_dim)
    by = equal_width_bins(dataset.y, part.bins_per_dim)
    return MiEstimate(plugin_mi(bx, by), np.empty(0), "fixed_partition", part.to_dict())


def _equidistributed(counts: np.ndarray, significance: float) -> bool:
    return stats.chisquare(counts).pvalue >= significance


def adaptive_partition_cells(x: np.ndarray, y: np.ndarray, part: PartitionConfig) -> list[tuple]:
    """Leaf cells of the median-split partition as (x_lo, x_hi, y_lo, y_hi, count).

    Cells are half-open ``(lo, hi]`` on each axis. A cell with at least
    ``4 * min_cell`` points is split at the marginal medians of its points
    when a chi-square test rejects equal occupancy of the four quadrants.
    """
    leaves = []
    stack = [(-np.inf, np.inf, -np.inf, np.inf, np.arange(x.shape[0]))]
    while stack:
        x_lo, x_hi, y_lo, y_hi, idx = stack.pop()
        if idx.shape[0] < 4 * part.min_cell:
            leaves.append((x_lo, x_hi, y_lo, y_hi, idx.shape[0]))
            continue
        cx, cy = x[idx], y[idx]
        mx, my = float(np.median(cx)), float(np.median(cy))
        left, low = cx <= mx, cy <= my
        quads = [left & low, left & ~low, ~left & low, ~left & ~low]
        counts = np.array([q.sum() for q in quads])
        # ties at the median can leave every point in one quadrant
        if counts.max() == idx.shape[0] or _equidistributed(counts, part.significance):
            leaves.append((x_lo, x_hi, y_lo, y_hi, idx.shape[0]))
            continue
        bounds = [(x_lo, mx, y_lo, my), (x_lo, mx, my, y_hi), (mx, x_hi, y_lo, my), (mx, x_hi, my, y_hi)]
        for q, (a, b, c, d) in zip(quads, bounds):
            if q.any():
                stack.append((a, b, c, d, idx[q]))
    return leaves


def estimate_adaptive_partition(dataset: Dataset, part: PartitionConfig | None = None) -> MiEstimate:
    """Plug-in MI over a data-adaptive partition (scalar X and Y only).

    Each leaf cell contributes ``p(cell) log(p(cell) / (p(x-strip) p(y-strip)))``
    where the strips are the cell's projections counted over all samples.
    """
    part = part or PartitionConfig()
    if dataset.x_dim != 1 or dataset.y_dim != 1:
        raise ParameterError("the adaptive partition estimator supports only one-dimensional X and Y")
    x, y = dataset.x[:, 0], dataset.y[:, 0]
    n = dataset.n
    xs, ys = np.sort(x), np.sort(y)
    terms = []
    for x_lo, x_hi, y_lo, y_hi, count in adaptive_partition_cells(x, y, part):
        # (lo, hi] strip counts on the sorted marginals
        nx = np.searchsorted(xs, x_hi, side="right") - np.searchsorted(xs, x_lo, side="right")
        ny = np.searchsorted(ys, y_hi, side="right") - np.searchsorted(ys, y_lo, side="right")
        terms.append(count * (math.log(count * n) - math.log(nx) - math.log(ny)))
    value = math.fsum(terms) / n
    return MiEstimate(value, np.empty(0), "adaptive_partition", part.to_dict())


ESTIMATOR_NAMES = ("mixed", "ksg", "noisy_ksg", "fixed_partition", "adaptive_partition")


@dataclass(frozen=True)
class Estimator:
    """A named estimator with its parameters bound.

    Call it as ``est(dataset, seed)``; the seed only matters for noisy KSG.
    """

    name: str
    params: dict = field(default_factory=dict)
    fn: Callable = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int | None:
        return self.params.get("k")

    def __call__(self, dataset: Dataset, seed: int = 0) -> MiEstimate:
        return self.fn(dataset, seed)


def get_estimator(name: str, *, k: int = 5, within_norm: str = "max", atom_tolerance: float = 0.0,
                  marginal_term: str = "log", sigma: float | None = None, bins: int = 8, significance: float = 0.05,
                  min_cell: int = 4) -> Estimator:
    """Look up an estimator by name and bind its configuration."""
    if name in ("mixed", "ksg", "noisy_ksg"):
        config = EstimatorConfig(k=k, within_norm=within_norm, atom_tolerance=atom_tolerance,
                                 marginal_term=marginal_term)
        params = config.to_dict()
        if name == "mixed":
            return Estimator(name, params, lambda ds, seed=0: estimate_mixed(ds, config))
        if name == "ksg":
            return Estimator(name, params, lambda ds, seed=0: estimate_ksg(ds, config))
        if sigma is None:
            raise ParameterError("noisy_ksg needs sigma")
        NoiseConfig(sigma)
        params["sigma"] = float(sigma)
        return Estimator(name, params,
                         lambda ds, seed=0: estimate_noisy_ksg(ds, config, NoiseConfig(sigma, seed)))
    if name in ("fixed_partition", "adaptive_partition"):
        part = PartitionConfig(bins_per_dim=bins, significance=significance, min_cell=min_cell)
        if name == "fixed_partition":
            return Estimator(name, part.to_dict(), lambda ds, seed=0: estimate_fixed_partition(ds, part))
        return Estimator(name, part.to_dict(), lambda ds, seed=0: estimate_adaptive_partition(ds, part))
    raise ParameterError(f"unknown estimator {name!r}; choose from {ESTIMATOR_NAMES}")
