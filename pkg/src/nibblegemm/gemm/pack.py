"""
Operand Packing

Reorders quantized operands into the order the micro-kernels consume them
and computes the depth-sums used by the zero-point correction terms.

RHS (depth x cols), per 4-column panel, two depth levels at a time:

    x(0,c0) x(1,c0) x(0,c1) x(1,c1) x(0,c2) x(1,c2) x(0,c3) x(1,c3) x(2,c0) ...

LHS (rows x depth), per kernel_height-row panel and per depth pair (k, k+1):

    8-row kernel:  rows 0-7 of k, rows 0-7 of k+1, ...
    24-row kernel: rows 0-7 of k, rows 0-7 of k+1, rows 8-15 of k,
                   rows 8-15 of k+1, rows 16-23 of k, rows 16-23 of k+1, ...

Depth is zero-padded to an even count and rows/cols to whole panels. Padding
bytes are 0, so they add nothing to the raw product; the depth-sums cover
the original entries only.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..validation import PackingError, validate_kernel_height
from .quant import QuantizedMatrix

logger = logging.getLogger(__name__)

RHS_PANEL_WIDTH = 4
DEPTH_STEP = 2
LANES = 8


def _round_up(value: int, multiple: int) -> int:
    return -(-value // multiple) * multiple


@dataclass(frozen=True)
class PackedRhs:
    """Kernel-ordered right operand plus per-column depth-sums."""
    buffer: np.ndarray
    depth: int
    cols_packed: int
    col_depth_sums: np.ndarray

    @property
    def padded_depth(self) -> int:
        return _round_up(self.depth, DEPTH_STEP)

    @property
    def cols(self) -> int:
        return int(self.col_depth_sums.shape[0])

    @property
    def panel_count(self) -> int:
        return self.cols_packed // RHS_PANEL_WIDTH

    def panel(self, index: int) -> np.ndarray:
        """Bytes of the `index`-th 4-column panel."""
        size = self.padded_depth * RHS_PANEL_WIDTH
        return self.buffer[index * size:(index + 1) * size]


@dataclass(frozen=True)
class PackedLhs:
    """Kernel-ordered left operand plus per-row depth-sums."""
    buffer: np.ndarray
    depth: int
    rows_packed: int
    kernel_height: int
    row_depth_sums: np.ndarray

    @property
    def padded_depth(self) -> int:
        return _round_up(self.depth, DEPTH_STEP)

    @property
    def rows(self) -> int:
        return int(self.row_depth_sums.shape[0])

    @property
    def panel_count(self) -> int:
        return self.rows_packed // self.kernel_height

    def panel(self, index: int) -> np.ndarray:
        """Bytes of the `index`-th row panel."""
        size = self.padded_depth * self.kernel_height
        return self.buffer[index * size:(index + 1) * size]


def pack_rhs(x: QuantizedMatrix) -> PackedRhs:
    """
    Pack the right operand (depth x cols) into 4-column panels.

    Args:
        x: Quantized right matrix

    Returns:
        PackedRhs with zero-padded buffer and per-column depth-sums
    """
    depth, cols = x.data.shape
    padded_depth = _round_up(depth, DEPTH_STEP)
    cols_packed = _round_up(cols, RHS_PANEL_WIDTH)

    grid = np.zeros((padded_depth, cols_packed), dtype=np.uint8)
    grid[:depth, :cols] = x.data
    buffer = (
        grid.reshape(padded_depth // DEPTH_STEP, DEPTH_STEP, cols_packed // RHS_PANEL_WIDTH, RHS_PANEL_WIDTH)
        .transpose(2, 0, 3, 1)
        .reshape(-1)
    )
    buffer.flags.writeable = False

    logger.debug(f"Packed RHS {depth}x{cols} into {cols_packed // RHS_PANEL_WIDTH} panels")
    return PackedRhs(
        buffer=buffer,
        depth=depth,
        cols_packed=cols_packed,
        col_depth_sums=x.depth_sums(axis=0),
    )


def pack_lhs(w: QuantizedMatrix, kernel_height: int) -> PackedLhs:
    """
    Pack the left operand (rows x depth) into kernel_height-row panels.

    Args:
        w: Quantized left matrix
        kernel_height: 8 (small kernel) or 24 (big kernel)

    Returns:
        PackedLhs with zero-padded buffer and per-row depth-sums

    Raises:
        KernelError: If kernel_height is not 8 or 24
    """
    kernel_height = validate_kernel_height(kernel_height)
    rows, depth = w.data.shape
    padded_depth = _round_up(depth, DEPTH_STEP)
    rows_packed = _round_up(rows, kernel_height)

    grid = np.zeros((rows_packed, padded_depth), dtype=np.uint8)
    grid[:rows, :depth] = w.data
    buffer = (
        grid.reshape(
            rows_packed // kernel_height,
            kernel_height // LANES,
            LANES,
            padded_depth // DEPTH_STEP,
            DEPTH_STEP,
        )
        .transpose(0, 3, 1, 4, 2)
        .reshape(-1)
    )
    buffer.flags.writeable = False

    logger.debug(
        f"Packed LHS {rows}x{depth} into {rows_packed // kernel_height} panels "
        f"of height {kernel_height}"
    )
    return PackedLhs(
        buffer=buffer,
        depth=depth,
        rows_packed=rows_packed,
        kernel_height=kernel_height,
        row_depth_sums=w.depth_sums(axis=1),
    )


def unpack_rhs(packed: PackedRhs) -> np.ndarray:
    """
    Reverse pack_rhs and strip the padding.

    Raises:
        PackingError: If the buffer length does not match the declared geometry
    """
    padded_depth = packed.padded_depth
    expected = padded_depth * packed.cols_packed
    if packed.buffer.size != expected:
        raise PackingError(
            f"RHS buffer holds {packed.buffer.size} bytes, expected {expected}",
            "Pack the operand again with pack_rhs()",
            "buffer",
        )
    grid = (
        packed.buffer.reshape(
            packed.cols_packed // RHS_PANEL_WIDTH,
            padded_depth // DEPTH_STEP,
            RHS_PANEL_WIDTH,
            DEPTH_STEP,
        )
        .transpose(1, 3, 0, 2)
        .reshape(padded_depth, packed.cols_packed)
    )
    return np.ascontiguousarray(grid[: packed.depth, : packed.cols])


def unpack_lhs(packed: PackedLhs) -> np.ndarray:
    """
    Reverse pack_lhs and strip the padding.

    Raises:
        PackingError: If the buffer length does not match the declared geometry
    """
    height = packed.kernel_height
    padded_depth = packed.padded_depth
    expected = padded_depth * packed.rows_packed
    if packed.buffer.size != expected:
        raise PackingError(
            f"LHS buffer holds {packed.buffer.size} bytes, expected {expected}",
            "Pack the operand again with pack_lhs()",
            "buffer",
        )
    grid = (
        packed.buffer.reshape(
            packed.rows_packed // height,
            padded_depth // DEPTH_STEP,
            height // LANES,
            DEPTH_STEP,
            LANES,
        )
        .transpose(0, 2, 4, 1, 3)
        .reshape(packed.rows_packed, padded_depth)
    )
    return np.ascontiguousarray(grid[: packed.rows, : packed.depth])
