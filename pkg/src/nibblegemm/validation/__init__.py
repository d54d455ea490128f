"""
nibblegemm Validation

Error hierarchy and centralized parameter validation shared by every
sub-package.
"""

from .errors import (
    NibbleGemmError,
    QuantizationError,
    PackingError,
    KernelError,
    DimensionMismatchError,
    OverflowRiskError,
    ChannelLimitError,
    GeometryError,
    ModelFormatError,
    BenchConfigError,
    OracleError,
)

from .validators import (
    SUPPORTED_BITS,
    KERNEL_HEIGHTS,
    validate_bits,
    validate_kernel_height,
    validate_finite,
    validate_positive_int,
    parse_int_list,
    parse_name_list,
)

__all__ = [
    # Errors
    "NibbleGemmError",
    "QuantizationError",
    "PackingError",
    "KernelError",
    "DimensionMismatchError",
    "OverflowRiskError",
    "ChannelLimitError",
    "GeometryError",
    "ModelFormatError",
    "BenchConfigError",
    "OracleError",

    # Validators
    "SUPPORTED_BITS",
    "KERNEL_HEIGHTS",
    "validate_bits",
    "validate_kernel_height",
    "validate_finite",
    "validate_positive_int",
    "parse_int_list",
    "parse_name_list",
]
