"""Boltzmann sampling of powersets without evaluating the generating function."""

from .distributions import RandomStream
from .errors import (
    BoltzmannError,
    BoundViolationError,
    CapacityError,
    DivergentRateError,
    NonConvergenceError,
    ParameterDomainError,
    RetriesExhaustedError,
    UnreachableTargetError,
)
from .sampler import Bivariate, PowersetSample, SampleBatch, Univariate, sample_batch, sample_free
from .structures import CombStructure, PartLabel, make_builtin, make_structure
from .tuning import (
    RejectionConfig,
    calibrate_numeric,
    calibrate_partitions,
    calibrate_squares,
    expected_size,
    sample_with_rejection,
)

__all__ = [
    "Bivariate", "BoltzmannError", "BoundViolationError", "CapacityError", "CombStructure",
    "DivergentRateError", "NonConvergenceError", "ParameterDomainError", "PartLabel",
    "PowersetSample", "RandomStream", "RejectionConfig", "RetriesExhaustedError", "SampleBatch",
    "Univariate", "UnreachableTargetError", "calibrate_numeric", "calibrate_partitions",
    "calibrate_squares", "expected_size", "make_builtin", "make_structure", "sample_batch",
    "sample_free", "sample_with_rejection",
]
