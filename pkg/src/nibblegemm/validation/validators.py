"""
Core Input Validators

Centralized parameter checks shared by the quantizer, the GEMM driver, the
network builder and the command line, with consistent error types and
helpful suggestions.
"""

import logging
from typing import Iterable, List, Sequence

import numpy as np

from .errors import BenchConfigError, KernelError, NibbleGemmError, QuantizationError

logger = logging.getLogger(__name__)

SUPPORTED_BITS = (4, 8)
KERNEL_HEIGHTS = (8, 24)


def validate_bits(bits: int) -> int:
    """
    Validate a quantization bit-width.

    Args:
        bits: Requested bit-width

    Returns:
        The bit-width as a plain int

    Raises:
        QuantizationError: If the bit-width is not supported
    """
    if isinstance(bits, bool) or bits not in SUPPORTED_BITS:
        raise QuantizationError(
            f"Unsupported bit-width: {bits}",
            "Use 4 for the nibble path or 8 for the byte path",
            "bits",
        )
    return int(bits)


def validate_kernel_height(kernel_height: int) -> int:
    """
    Validate a micro-kernel height.

    Raises:
        KernelError: If the height is not 8 or 24
    """
    if isinstance(kernel_height, bool) or kernel_height not in KERNEL_HEIGHTS:
        raise KernelError(
            f"Unsupported kernel height: {kernel_height}",
            "Use 24 for the big kernel or 8 for the small kernel",
            "kernel_height",
        )
    return int(kernel_height)


def validate_finite(values: np.ndarray, field: str = "values") -> np.ndarray:
    """
    Validate that an array is non-empty and contains only finite reals.

    Args:
        values: Array-like of real values
        field: Name reported in the error

    Returns:
        The values as a float64 numpy array

    Raises:
        QuantizationError: If the array is empty or holds NaN/inf
    """
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise QuantizationError(
            "Cannot quantize an empty array",
            "Pass at least one value",
            field,
        )
    if not np.all(np.isfinite(array)):
        bad = int(np.count_nonzero(~np.isfinite(array)))
        raise QuantizationError(
            f"Found {bad} non-finite value(s)",
            "Replace NaN and infinite entries before quantizing",
            field,
        )
    return array


def validate_positive_int(value: int, field: str, minimum: int = 1) -> int:
    """Validate an integer setting that must be at least `minimum`."""
    if isinstance(value, (float, np.floating)) and not float(value).is_integer():
        raise NibbleGemmError(
            f"{field} must be a whole number, got {value}",
            f"Please use an integer >= {minimum}",
            field,
        )
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        try:
            value = int(value)
        except (ValueError, TypeError):
            raise NibbleGemmError(
                f"{field} must be a number",
                f"Please use an integer >= {minimum}",
                field,
            )
    if value < minimum:
        raise NibbleGemmError(
            f"{field} must be at least {minimum}, got {value}",
            f"Please use an integer >= {minimum}",
            field,
        )
    return int(value)


def parse_int_list(text: str, field: str) -> List[int]:
    """
    Parse a comma-separated list of positive integers such as "8,24".

    Raises:
        BenchConfigError: If the list is empty or has a bad entry
    """
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise BenchConfigError(
            f"{field} list cannot be empty",
            f"Pass a comma-separated list, e.g. --{field} 8,24",
            field,
        )
    result = []
    for item in items:
        try:
            number = int(item)
        except ValueError:
            raise BenchConfigError(
                f"Invalid {field} entry: '{item}'",
                "Entries must be positive integers separated by commas",
                field,
            )
        if number < 1:
            raise BenchConfigError(
                f"{field} entries must be positive, got {number}",
                "Entries must be positive integers separated by commas",
                field,
            )
        result.append(number)
    return result


def parse_name_list(text: str, allowed: Sequence[str], field: str) -> List[str]:
    """
    Parse a comma-separated list of names against an allowed vocabulary.

    Raises:
        BenchConfigError: If the list is empty or has an unknown name
    """
    names = [part.strip().lower() for part in text.split(",") if part.strip()]
    if not names:
        raise BenchConfigError(
            f"{field} list cannot be empty",
            f"Choose from: {', '.join(allowed)}",
            field,
        )
    unknown = [name for name in names if name not in allowed]
    if unknown:
        raise BenchConfigError(
            f"Unknown {field}: {', '.join(unknown)}",
            f"Choose from: {', '.join(allowed)}",
            field,
        )
    return _dedupe(names)


def _dedupe(items: Iterable[str]) -> List[str]:
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen
