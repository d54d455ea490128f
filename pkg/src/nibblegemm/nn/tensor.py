"""
Activation Tensors

Float activations (Tensor) and integer activations paired with their
composed scale (ScaledActivation). Both use channel-major CHW layout.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..validation import GeometryError, QuantizationError

Shape = Tuple[int, int, int]


def _as_chw(data: np.ndarray, kind: str) -> np.ndarray:
    if data.ndim != 3:
        raise GeometryError(
            f"{kind} data must be 3-D (channels, height, width), got shape {data.shape}",
            "Reshape the input to CHW layout",
            "data",
        )
    return data


@dataclass(frozen=True)
class Tensor:
    """Real-valued CHW activation."""
    data: np.ndarray

    def __post_init__(self) -> None:
        array = np.asarray(self.data, dtype=np.float64)
        if array.ndim == 2:
            array = array[None, :, :]
        object.__setattr__(self, "data", _as_chw(array, "Tensor"))

    @classmethod
    def from_flat(cls, values, shape: Shape) -> "Tensor":
        """Build a tensor from channel-major flat values."""
        array = np.asarray(values, dtype=np.float64)
        if array.size != shape[0] * shape[1] * shape[2]:
            raise GeometryError(
                f"{array.size} values cannot fill a {shape} tensor",
                "The value count must equal channels * height * width",
                "data",
            )
        return cls(array.reshape(shape))

    @property
    def shape(self) -> Shape:
        c, h, w = self.data.shape
        return int(c), int(h), int(w)

    @property
    def channels(self) -> int:
        return self.shape[0]

    @property
    def height(self) -> int:
        return self.shape[1]

    @property
    def width(self) -> int:
        return self.shape[2]

    def flatten(self) -> np.ndarray:
        return self.data.reshape(-1)


@dataclass(frozen=True)
class ScaledActivation:
    """
    Integer CHW activation with zero-point 0: real value = scale * data.

    Data is int16 on the 4-bit signed16 path and int32 otherwise.
    """
    data: np.ndarray
    scale: float

    def __post_init__(self) -> None:
        array = np.asarray(self.data)
        if not np.issubdtype(array.dtype, np.integer):
            raise QuantizationError(
                f"Scaled activations hold integers, got dtype {array.dtype}",
                "Build them from a CorrectedResult",
                "data",
            )
        scale = float(self.scale)
        if not (math.isfinite(scale) and scale > 0):
            raise QuantizationError(
                f"Activation scale must be positive and finite, got {self.scale}",
                "Compose scales as s_w * s_x",
                "scale",
            )
        object.__setattr__(self, "data", _as_chw(array, "ScaledActivation"))
        object.__setattr__(self, "scale", scale)

    @property
    def shape(self) -> Shape:
        c, h, w = self.data.shape
        return int(c), int(h), int(w)

    @property
    def channels(self) -> int:
        return self.shape[0]

    @property
    def height(self) -> int:
        return self.shape[1]

    @property
    def width(self) -> int:
        return self.shape[2]

    def dequantize(self) -> Tensor:
        """Q -> F: multiply the integers by the composed scale."""
        return Tensor(self.scale * self.data.astype(np.float64))
