"""Additive models with exact higher-order feature interactions.

Per-feature shape networks feed an interaction layer that sums every
feature-subset product up to a chosen order in linear time, so each
prediction decomposes exactly into named feature and feature-group
contributions.
"""

from .estimators import HonamClassifier, HonamRegressor
from .exceptions import (ConfigError, DataError, HonamError, ModelFormatError,
                         NumericError, ShapeError, StateError)
from .interactions import count_kernel_ops, enumerate_interactions, esp_sums, power_sums
from .metrics import (adjusted_r_squared, auprc, auroc, disparate_impact, r_absolute,
                      r_squared)
from .network import ContributionReport, HonamNetwork
from .preprocessing import ColumnSpec, RawTable, Schema, TablePreprocessor
from .training import TrainConfig, TrainResult, train

__version__ = "0.1.0"

__all__ = [
    "ColumnSpec",
    "ConfigError",
    "ContributionReport",
    "DataError",
    "HonamClassifier",
    "HonamError",
    "HonamNetwork",
    "HonamRegressor",
    "ModelFormatError",
    "NumericError",
    "RawTable",
    "Schema",
    "ShapeError",
    "StateError",
    "TablePreprocessor",
    "TrainConfig",
    "TrainResult",
    "adjusted_r_squared",
    "auprc",
    "auroc",
    "count_kernel_ops",
    "disparate_impact",
    "enumerate_interactions",
    "esp_sums",
    "power_sums",
    "r_absolute",
    "r_squared",
    "train",
    "__version__",
]
