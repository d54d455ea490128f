"""
Micro-Kernels

Compute one (kernel_height x 4) tile of the raw product from a packed LHS
panel and a packed RHS panel. Operand bytes are widened to 16 bits and
accumulated in 16-bit unsigned lanes, two depth levels per step: each RHS
byte is broadcast across the 8 lanes of the matching LHS depth level and
multiply-accumulated into the tile column.

Two implementations share that contract and produce identical tiles:
VECTOR (numpy broadcasting) and SCALAR (plain Python loops).
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..validation import KernelError, validate_kernel_height
from .pack import DEPTH_STEP, LANES, RHS_PANEL_WIDTH

logger = logging.getLogger(__name__)

LANE_MASK = 0xFFFF


class AccumulatorMode(str, Enum):
    """How the raw product term is held before the corrections."""
    SIGNED16 = "signed16"
    UNSIGNED16_EXTENDED = "unsigned16_extended"
    I32 = "i32"


class KernelBackend(str, Enum):
    """Micro-kernel implementation."""
    VECTOR = "vector"
    SCALAR = "scalar"


@dataclass
class AccumulatorTile:
    """A kernel_height x 4 block of 16-bit unsigned accumulators."""
    height: int
    values: np.ndarray
    width: int = RHS_PANEL_WIDTH

    @classmethod
    def zeros(cls, height: int) -> "AccumulatorTile":
        height = validate_kernel_height(height)
        return cls(height, np.zeros((height, RHS_PANEL_WIDTH), dtype=np.uint16))

    def widen(self, mode: AccumulatorMode) -> np.ndarray:
        """Extend the 16-bit lanes to int32 according to `mode`."""
        return widen_lanes(self.values, mode)


def widen_lanes(values: np.ndarray, mode: AccumulatorMode) -> np.ndarray:
    """
    Extend uint16 accumulator lanes to int32.

    SIGNED16 reinterprets the lanes as int16 and sign-extends;
    UNSIGNED16_EXTENDED zero-extends.

    Raises:
        KernelError: For modes that are not 16-bit
    """
    if mode == AccumulatorMode.SIGNED16:
        return values.view(np.int16).astype(np.int32)
    if mode == AccumulatorMode.UNSIGNED16_EXTENDED:
        return values.astype(np.int32)
    raise KernelError(
        f"Accumulator lanes are 16-bit; mode {AccumulatorMode(mode).value} does not apply",
        "Use signed16 or unsigned16_extended with the 4-bit kernels",
        "mode",
    )


def microkernel(
    tile: AccumulatorTile,
    lhs_panel: np.ndarray,
    rhs_panel: np.ndarray,
    depth: int,
    backend: KernelBackend = KernelBackend.VECTOR,
) -> AccumulatorTile:
    """
    Accumulate lhs_panel x rhs_panel into `tile` in place.

    tile[r][c] += sum over k < depth of lhs(r, k) * rhs(k, c), in 16-bit lanes.
    The caller is responsible for keeping depth within the overflow-safe bound.

    Args:
        tile: Accumulator tile whose height matches the LHS panel
        lhs_panel: One packed LHS panel (depth * tile.height bytes)
        rhs_panel: One packed RHS panel (depth * 4 bytes)
        depth: Padded depth, even
        backend: VECTOR or SCALAR implementation

    Returns:
        The same tile, updated

    Raises:
        KernelError: If the panels or depth do not match the tile geometry
    """
    _check_panels(tile, lhs_panel, rhs_panel, depth)
    if depth == 0:
        return tile
    if backend == KernelBackend.SCALAR:
        _microkernel_scalar(tile, lhs_panel, rhs_panel, depth)
    else:
        _microkernel_vector(tile, lhs_panel, rhs_panel, depth)
    return tile


def _check_panels(
    tile: AccumulatorTile, lhs_panel: np.ndarray, rhs_panel: np.ndarray, depth: int
) -> None:
    validate_kernel_height(tile.height)
    if tile.values.shape != (tile.height, RHS_PANEL_WIDTH) or tile.values.dtype != np.uint16:
        raise KernelError(
            f"Tile must be uint16 of shape ({tile.height}, {RHS_PANEL_WIDTH})",
            "Create tiles with AccumulatorTile.zeros()",
            "tile",
        )
    if depth < 0 or depth % DEPTH_STEP:
        raise KernelError(
            f"Kernel depth must be a non-negative even number, got {depth}",
            "Pack operands with pack_lhs()/pack_rhs(), which pad depth to even",
            "depth",
        )
    if lhs_panel.size != depth * tile.height:
        raise KernelError(
            f"LHS panel holds {lhs_panel.size} bytes, expected {depth * tile.height}",
            "Pass one panel from PackedLhs.panel()",
            "lhs_panel",
        )
    if rhs_panel.size != depth * RHS_PANEL_WIDTH:
        raise KernelError(
            f"RHS panel holds {rhs_panel.size} bytes, expected {depth * RHS_PANEL_WIDTH}",
            "Pass one panel from PackedRhs.panel()",
            "rhs_panel",
        )


def _microkernel_vector(
    tile: AccumulatorTile, lhs_panel: np.ndarray, rhs_panel: np.ndarray, depth: int
) -> None:
    steps = depth // DEPTH_STEP
    height = tile.height
    # (step, lane block, depth level, lane) -> (step, row, depth level)
    lhs = (
        lhs_panel.reshape(steps, height // LANES, DEPTH_STEP, LANES)
        .transpose(0, 1, 3, 2)
        .reshape(steps, height, DEPTH_STEP)
        .astype(np.uint16)
    )
    rhs = rhs_panel.reshape(steps, RHS_PANEL_WIDTH, DEPTH_STEP).astype(np.uint16)
    products = lhs[:, :, None, :] * rhs[:, None, :, :]
    tile.values += products.sum(axis=(0, 3), dtype=np.uint16)


def _microkernel_scalar(
    tile: AccumulatorTile, lhs_panel: np.ndarray, rhs_panel: np.ndarray, depth: int
) -> None:
    height = tile.height
    lhs = lhs_panel.tolist()
    rhs = rhs_panel.tolist()
    acc = tile.values.tolist()
    lhs_step = height * DEPTH_STEP
    rhs_step = RHS_PANEL_WIDTH * DEPTH_STEP

    for step in range(depth // DEPTH_STEP):
        lhs_base = step * lhs_step
        rhs_base = step * rhs_step
        for col in range(RHS_PANEL_WIDTH):
            r0 = rhs[rhs_base + col * DEPTH_STEP]
            r1 = rhs[rhs_base + col * DEPTH_STEP + 1]
            for block in range(height // LANES):
                offset = lhs_base + block * LANES * DEPTH_STEP
                for lane in range(LANES):
                    row = block * LANES + lane
                    value = acc[row][col] + lhs[offset + lane] * r0 + lhs[offset + LANES + lane] * r1
                    acc[row][col] = value & LANE_MASK

    tile.values[:, :] = np.asarray(acc, dtype=np.uint16)
