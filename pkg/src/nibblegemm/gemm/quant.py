"""
Linear Quantization

Computes per-tensor quantization parameters and converts between real
values and unsigned p-bit integers:

    scale      = (max(max v, 0) - min(min v, 0)) / (2^p - 1)
    zero_point = -floor(min(min v, 0) / scale)
    q          = clamp(floor(v / scale) + zero_point, 0, 2^p - 1)
    v'         = scale * (q - zero_point)

Storing the zero-point as a non-negative integer keeps the four-term
product decomposition exact (see qgemm).
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..validation import QuantizationError, validate_bits, validate_finite

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuantParams:
    """Scale factor and integer zero-point of one tensor at `bits` bits."""
    scale: float
    zero_point: int
    bits: int

    def __post_init__(self) -> None:
        bits = validate_bits(self.bits)
        scale = float(self.scale)
        if not (math.isfinite(scale) and scale > 0):
            raise QuantizationError(
                f"Scale must be a positive finite number, got {self.scale}",
                "Derive parameters with compute_quant_params()",
                "scale",
            )
        qmax = (1 << bits) - 1
        if int(self.zero_point) != self.zero_point or not 0 <= self.zero_point <= qmax:
            raise QuantizationError(
                f"Zero-point {self.zero_point} outside [0, {qmax}] for {bits}-bit values",
                "Derive parameters with compute_quant_params()",
                "zero_point",
            )
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "zero_point", int(self.zero_point))
        object.__setattr__(self, "bits", bits)

    @property
    def qmax(self) -> int:
        """Largest representable quantized value, 2^p - 1."""
        return (1 << self.bits) - 1


@dataclass(frozen=True)
class QuantizedMatrix:
    """Row-major matrix of unsigned p-bit integers (one per byte) plus its params."""
    data: np.ndarray
    params: QuantParams

    def __post_init__(self) -> None:
        array = np.asarray(self.data)
        if array.ndim != 2:
            raise QuantizationError(
                f"Quantized matrix must be 2-D, got shape {array.shape}",
                "Reshape the values to (rows, cols) first",
                "data",
            )
        if array.size and not np.issubdtype(array.dtype, np.integer):
            raise QuantizationError(
                f"Quantized data must be integers, got dtype {array.dtype}",
                "Use quantize() to convert real values",
                "data",
            )
        if array.size and (int(array.min()) < 0 or int(array.max()) > self.params.qmax):
            raise QuantizationError(
                f"Quantized values must lie in [0, {self.params.qmax}]",
                "Use quantize() to convert real values",
                "data",
            )
        frozen = np.array(array, dtype=np.uint8, copy=True)
        frozen.flags.writeable = False
        object.__setattr__(self, "data", frozen)

    @classmethod
    def from_integers(
        cls, values, scale: float, zero_point: int, bits: int = 4
    ) -> "QuantizedMatrix":
        """Build a matrix from already-quantized integers (e.g. a 2-D list)."""
        return cls(np.asarray(values), QuantParams(scale, zero_point, bits))

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def cols(self) -> int:
        return int(self.data.shape[1])

    def take_rows(self, start: int, stop: int) -> "QuantizedMatrix":
        """Return rows [start, stop) with the same parameters."""
        return QuantizedMatrix(self.data[start:stop], self.params)

    def depth_sums(self, axis: int) -> np.ndarray:
        """Sum the quantized values along `axis` into 32-bit signed integers."""
        return self.data.sum(axis=axis, dtype=np.int32)


def compute_quant_params(values, bits: int) -> QuantParams:
    """
    Compute per-tensor quantization parameters.

    The range always includes 0 so that real zero is exactly representable.
    An all-zero input yields scale 1 and zero-point 0.

    Args:
        values: Non-empty array-like of finite reals
        bits: Bit-width, 4 or 8

    Returns:
        QuantParams for the values

    Raises:
        QuantizationError: If the input is empty, non-finite, or bits is unsupported
    """
    bits = validate_bits(bits)
    array = validate_finite(values)
    qmax = (1 << bits) - 1

    high = max(float(array.max()), 0.0)
    low = min(float(array.min()), 0.0)
    span = high - low
    if not math.isfinite(span):
        raise QuantizationError(
            f"Value range [{low}, {high}] is too wide to quantize",
            "Rescale the values so that max - min is a finite float",
            "values",
        )
    if span == 0.0:
        return QuantParams(1.0, 0, bits)

    scale = span / qmax
    if not scale > 0.0:
        # span below the smallest positive float times qmax
        return QuantParams(1.0, 0, bits)

    zero_point = -math.floor(low / scale)
    zero_point = min(max(zero_point, 0), qmax)
    return QuantParams(scale, zero_point, bits)


def quantize_array(values, params: QuantParams) -> np.ndarray:
    """
    Quantize an array of any shape with the given parameters.

    Returns:
        uint8 array of the same shape, every entry in [0, 2^p - 1]
    """
    array = validate_finite(values)
    q = np.floor(array / params.scale) + params.zero_point
    return np.clip(q, 0, params.qmax).astype(np.uint8)


def dequantize_array(q: np.ndarray, params: QuantParams) -> np.ndarray:
    """Map quantized integers of any shape back to reals: scale * (q - zero_point)."""
    return params.scale * (np.asarray(q, dtype=np.int32) - params.zero_point).astype(
        np.float64
    )


def quantize(values, params: QuantParams) -> QuantizedMatrix:
    """
    Quantize real values into a QuantizedMatrix.

    A scalar or 1-D input becomes a single-row matrix.

    Raises:
        QuantizationError: If the input is not at most 2-D or holds non-finite values
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim < 2:
        array = array.reshape(1, -1)
    elif array.ndim > 2:
        raise QuantizationError(
            f"quantize() expects at most 2 dimensions, got shape {array.shape}",
            "Use quantize_array() for tensors",
            "values",
        )
    return QuantizedMatrix(quantize_array(array, params), params)


def dequantize(q: QuantizedMatrix) -> np.ndarray:
    """Dequantize a QuantizedMatrix into a float64 array of the same shape."""
    return dequantize_array(q.data, q.params)


def quantize_tensor(values, bits: int) -> Tuple[np.ndarray, QuantParams]:
    """
    Dynamic per-tensor quantization: derive params from the values and apply them.

    Returns:
        Tuple of (uint8 array of the input's shape, QuantParams)
    """
    params = compute_quant_params(values, bits)
    q = quantize_array(values, params)
    logger.debug(
        f"Quantized tensor {np.shape(values)} at {bits} bits: "
        f"scale={params.scale:.6g} zero_point={params.zero_point}"
    )
    return q, params
