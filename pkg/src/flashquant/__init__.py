"""Read-voltage quantization and LDPC decoding toolkit for MLC flash channels."""

from .channel import (
    FlashChannelModel,
    Gaussian,
    GaussianTailsUniformCenter,
    RetentionParams,
    cdf_eval,
    default_retention_params,
    gaussian_model,
    pdf_eval,
    retention_model,
    sample,
)
from .errors import ConfigError, ConstructionError, FlashQuantError, NumericalError
from .mapping import GrayLabeling, bit_llrs, bits_to_level, level_to_bits, llr_table
from .quantize import (
    InputDistribution,
    MmiResult,
    SearchConfig,
    TransitionMatrix,
    WordLineVoltages,
    build_transition_matrix,
    constant_ratio_thresholds,
    hard_thresholds,
    mutual_information,
    optimize_mmi,
)

__version__ = "0.1.0"

__all__ = [
    "FlashChannelModel",
    "Gaussian",
    "GaussianTailsUniformCenter",
    "RetentionParams",
    "cdf_eval",
    "default_retention_params",
    "gaussian_model",
    "pdf_eval",
    "retention_model",
    "sample",
    "ConfigError",
    "ConstructionError",
    "FlashQuantError",
    "NumericalError",
    "GrayLabeling",
    "bit_llrs",
    "bits_to_level",
    "level_to_bits",
    "llr_table",
    "InputDistribution",
    "MmiResult",
    "SearchConfig",
    "TransitionMatrix",
    "WordLineVoltages",
    "build_transition_matrix",
    "constant_ratio_thresholds",
    "hard_thresholds",
    "mutual_information",
    "optimize_mmi",
    "__version__",
]
