"""Mutual information estimation for discrete, continuous and mixed data."""

__version__ = "0.1.0"

from .core import (
    Dataset,
    DatasetError,
    EstimatorConfig,
    InvariantError,
    MiEstimate,
    MimixError,
    NeighborProfile,
    ParameterError,
    validate_dataset,
)
from .estimators import (
    NoiseConfig,
    PartitionConfig,
    estimate_adaptive_partition,
    estimate_fixed_partition,
    estimate_ksg,
    estimate_mixed,
    estimate_noisy_ksg,
    get_estimator,
)
from .neighbors import DistanceOracle, build_index, k_schedule, neighbor_profiles
from .specfun import digamma

__all__ = [
    "Dataset",
    "DatasetError",
    "DistanceOracle",
    "EstimatorConfig",
    "InvariantError",
    "MiEstimate",
    "MimixError",
    "NeighborProfile",
    "NoiseConfig",
    "ParameterError",
    "PartitionConfig",
    "build_index",
    "digamma",
    "estimate_adaptive_partition",
    "estimate_fixed_partition",
    "estimate_ksg",
    "estimate_mixed",
    "estimate_noisy_ksg",
    "get_estimator",
    "k_schedule",
    "neighbor_profiles",
    "validate_dataset",
]
