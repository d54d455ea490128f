"""
im2col Unrolling

Turns a valid (unpadded) strided convolution into a matrix product. For a
C x H x W input and a kh x kw kernel the column matrix is D x N with
D = C * kh * kw rows ordered channel-major then row-major within the
kernel window, and one column per output position in row-major order.
"""

from typing import Tuple, Union

import numpy as np

from ..validation import GeometryError, validate_positive_int
from .tensor import ScaledActivation, Tensor


def conv_output_size(height: int, width: int, kernel: Tuple[int, int], stride: Tuple[int, int]) -> Tuple[int, int]:
    """
    Output height and width of a valid convolution.

    Raises:
        GeometryError: If the kernel is larger than the input
    """
    kh, kw = kernel
    sh, sw = stride
    if height < kh or width < kw:
        raise GeometryError(
            f"Kernel {kh}x{kw} does not fit a {height}x{width} input",
            "Use a smaller kernel or a larger input; convolutions are unpadded",
            "kernel",
        )
    return (height - kh) // sh + 1, (width - kw) // sw + 1


def im2col(
    data: Union[np.ndarray, Tensor, ScaledActivation], kh: int, kw: int, sh: int = 1, sw: int = 1
) -> np.ndarray:
    """
    Unroll the receptive fields of a CHW array into columns.

    Args:
        data: Input of shape (C, H, W), any dtype, or a Tensor / ScaledActivation
            whose array is unrolled as-is (scales are the caller's concern)
        kh, kw: Kernel height and width
        sh, sw: Strides

    Returns:
        Array of shape (C * kh * kw, out_h * out_w) with the input's dtype

    Raises:
        GeometryError: If the input is not 3-D or the kernel does not fit
    """
    for value, field in ((kh, "kh"), (kw, "kw"), (sh, "sh"), (sw, "sw")):
        validate_positive_int(value, field)
    if isinstance(data, (Tensor, ScaledActivation)):
        data = data.data
    data = np.asarray(data)
    if data.ndim != 3:
        raise GeometryError(
            f"im2col expects a (C, H, W) array, got shape {data.shape}",
            "Reshape the input to CHW layout",
            "data",
        )
    channels, height, width = data.shape
    out_h, out_w = conv_output_size(height, width, (kh, kw), (sh, sw))

    cols = np.empty((channels, kh, kw, out_h, out_w), dtype=data.dtype)
    for y in range(kh):
        y_max = y + sh * out_h
        for x in range(kw):
            x_max = x + sw * out_w
            cols[:, y, x, :, :] = data[:, y:y_max:sh, x:x_max:sw]
    return cols.reshape(channels * kh * kw, out_h * out_w)
