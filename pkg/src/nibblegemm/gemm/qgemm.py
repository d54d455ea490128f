"""
Quantized GEMM Driver

Assembles the corrected integer product of two quantized matrices

    r[i,j] = sum_k w[i,k] x[k,j] - z_w sum_k x[k,j] - z_x sum_k w[i,k] + D z_x z_w

which equals sum_k (w[i,k] - z_w)(x[k,j] - z_x) exactly and carries the scale
s_w * s_x with zero-point 0. The 4-bit path computes the first term with the
packed micro-kernels in 16-bit lanes; the 8-bit path accumulates in 32 bits.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..validation import (
    DimensionMismatchError,
    NibbleGemmError,
    OverflowRiskError,
    QuantizationError,
    validate_bits,
    validate_kernel_height,
    validate_positive_int,
)
from .kernel import (
    AccumulatorMode,
    AccumulatorTile,
    KernelBackend,
    microkernel,
    widen_lanes,
)
from .pack import RHS_PANEL_WIDTH, PackedLhs, PackedRhs, pack_lhs, pack_rhs
from .quant import QuantizedMatrix, QuantParams

logger = logging.getLogger(__name__)

INT16_MAX = (1 << 15) - 1
UINT16_MAX = (1 << 16) - 1
INT32_MAX = (1 << 31) - 1

BIG_KERNEL = 24
SMALL_KERNEL = 8


@dataclass(frozen=True)
class GemmConfig:
    """Kernel height, accumulator interpretation and execution knobs for one GEMM."""
    kernel_height: int = BIG_KERNEL
    accumulator_mode: AccumulatorMode = AccumulatorMode.SIGNED16
    bits: int = 4
    checked: bool = True
    backend: KernelBackend = KernelBackend.VECTOR
    workers: int = 1

    def __post_init__(self) -> None:
        validate_kernel_height(self.kernel_height)
        bits = validate_bits(self.bits)
        mode = AccumulatorMode(self.accumulator_mode)
        if (mode == AccumulatorMode.I32) != (bits == 8):
            raise NibbleGemmError(
                f"Accumulator mode {mode.value} cannot be used with {bits}-bit operands",
                "Use i32 for 8-bit operands and signed16/unsigned16_extended for 4-bit",
                "accumulator_mode",
            )
        object.__setattr__(self, "workers", validate_positive_int(self.workers, "workers"))
        object.__setattr__(self, "accumulator_mode", mode)
        object.__setattr__(self, "backend", KernelBackend(self.backend))

    @classmethod
    def for_u8(cls) -> "GemmConfig":
        """Configuration of the 8-bit comparison path."""
        return cls(bits=8, accumulator_mode=AccumulatorMode.I32)

    @property
    def max_depth(self) -> int:
        return max_safe_depth(self.bits, self.accumulator_mode)


@dataclass(frozen=True)
class CorrectedResult:
    """Corrected int32 product with zero-point 0 and scale s_w * s_x."""
    values: np.ndarray
    result_scale: float

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def dequantize(self) -> np.ndarray:
        """Real-valued approximation of the product: result_scale * values."""
        return self.result_scale * self.values.astype(np.float64)


@dataclass(frozen=True)
class PreparedWeights:
    """
    Left operand prepared once for repeated products.

    Rows [0, big_rows) are packed for the 24-row kernel, rows
    [big_rows, kernel_rows) for the 8-row kernel, and the remaining rows
    are multiplied without the kernels.
    """
    matrix: QuantizedMatrix
    kernel_height: int
    big: Optional[PackedLhs]
    small: Optional[PackedLhs]
    row_depth_sums: np.ndarray

    @property
    def params(self) -> QuantParams:
        return self.matrix.params

    @property
    def rows(self) -> int:
        return self.matrix.rows

    @property
    def depth(self) -> int:
        return self.matrix.cols

    @property
    def big_rows(self) -> int:
        return self.big.rows_packed if self.big is not None else 0

    @property
    def kernel_rows(self) -> int:
        return self.big_rows + (self.small.rows_packed if self.small is not None else 0)


def max_safe_depth(bits: int, mode: AccumulatorMode) -> int:
    """
    Largest depth whose worst-case raw product fits the accumulators.

    (4, signed16) -> 145, (4, unsigned16_extended) -> 291, (8, i32) -> 33025.

    Raises:
        NibbleGemmError: For an invalid bits/mode combination
    """
    bits = validate_bits(bits)
    mode = AccumulatorMode(mode)
    product = ((1 << bits) - 1) ** 2
    if bits == 4 and mode == AccumulatorMode.SIGNED16:
        return INT16_MAX // product
    if bits == 4 and mode == AccumulatorMode.UNSIGNED16_EXTENDED:
        return UINT16_MAX // product
    if bits == 8 and mode == AccumulatorMode.I32:
        return INT32_MAX // product
    raise NibbleGemmError(
        f"No accumulator bound for {bits}-bit operands in {mode.value} mode",
        "Use i32 for 8-bit operands and signed16/unsigned16_extended for 4-bit",
        "accumulator_mode",
    )


def conv_channel_limit(q_bits: int, acc_bits: int, kh: int, kw: int) -> int:
    """
    Maximum input channels of a q-bit convolution with signed acc_bits accumulators.

    floor(floor((2^(acc_bits-1) - 1) / (2^q_bits - 1)^2) / (kh * kw))
    """
    kh = validate_positive_int(kh, "kh")
    kw = validate_positive_int(kw, "kw")
    depth = ((1 << (acc_bits - 1)) - 1) // ((1 << q_bits) - 1) ** 2
    return depth // (kh * kw)


def channel_limit(bits: int, mode: AccumulatorMode, kh: int, kw: int) -> int:
    """Channel limit of a kh x kw convolution under a configured accumulator mode."""
    kh = validate_positive_int(kh, "kh")
    kw = validate_positive_int(kw, "kw")
    return max_safe_depth(bits, mode) // (kh * kw)


def select_accumulator_mode(depth: int, bits: int = 4) -> AccumulatorMode:
    """
    Pick the narrowest accumulator mode that is safe for `depth`.

    Raises:
        OverflowRiskError: If no mode covers the depth
    """
    bits = validate_bits(bits)
    if bits == 8:
        candidates: Sequence[AccumulatorMode] = (AccumulatorMode.I32,)
    else:
        candidates = (AccumulatorMode.SIGNED16, AccumulatorMode.UNSIGNED16_EXTENDED)
    for mode in candidates:
        if depth <= max_safe_depth(bits, mode):
            return mode
    last = candidates[-1]
    raise OverflowRiskError(
        depth,
        max_safe_depth(bits, last),
        last.value,
        "Split the multiplication along depth or use wider operands",
    )


def check_depth(depth: int, config: GemmConfig) -> None:
    """
    Enforce the overflow guard for `config`.

    Raises:
        OverflowRiskError: If depth exceeds the bound and the config is checked
    """
    limit = config.max_depth
    if depth <= limit:
        return
    if config.checked:
        suggestion = (
            "Use the unsigned16_extended mode (depth <= 291)"
            if config.accumulator_mode == AccumulatorMode.SIGNED16 and depth <= UINT16_MAX // 225
            else "Reduce the depth (fewer input channels or a smaller kernel)"
        )
        raise OverflowRiskError(depth, limit, config.accumulator_mode.value, suggestion)
    logger.warning(
        f"Unchecked GEMM: depth {depth} exceeds {limit} for "
        f"{config.accumulator_mode.value}; results may wrap"
    )


def prepare_weights(w: QuantizedMatrix, config: Optional[GemmConfig] = None) -> PreparedWeights:
    """
    Pack the left operand and compute its row sums once.

    Rows are covered by 24-row panels first (when the config selects the big
    kernel), then 8-row panels; leftover rows stay unpacked.
    """
    config = config or GemmConfig()
    _check_bits(w, config)
    rows = w.rows
    if config.accumulator_mode == AccumulatorMode.I32:
        # the 8-bit path multiplies unpacked operands
        return PreparedWeights(w, config.kernel_height, None, None, w.depth_sums(axis=1))
    big_rows = (rows // BIG_KERNEL) * BIG_KERNEL if config.kernel_height == BIG_KERNEL else 0
    kernel_rows = big_rows + ((rows - big_rows) // SMALL_KERNEL) * SMALL_KERNEL

    big = pack_lhs(w.take_rows(0, big_rows), BIG_KERNEL) if big_rows else None
    small = (
        pack_lhs(w.take_rows(big_rows, kernel_rows), SMALL_KERNEL)
        if kernel_rows > big_rows
        else None
    )
    sums = [packed.row_depth_sums for packed in (big, small) if packed is not None]
    sums.append(w.take_rows(kernel_rows, rows).depth_sums(axis=1))

    logger.debug(
        f"Prepared {rows}x{w.cols} weights: {big_rows} big-kernel rows, "
        f"{kernel_rows - big_rows} small-kernel rows, {rows - kernel_rows} tail rows"
    )
    return PreparedWeights(
        matrix=w,
        kernel_height=config.kernel_height,
        big=big,
        small=small,
        row_depth_sums=np.concatenate(sums).astype(np.int32),
    )


def qgemm(
    w: QuantizedMatrix, x: QuantizedMatrix, config: Optional[GemmConfig] = None
) -> CorrectedResult:
    """
    Quantized product of w (M x D) and x (D x N).

    4-bit operands run through the packed 16-bit kernels; an 8-bit config
    routes to qgemm_u8().

    Args:
        w: Left quantized matrix
        x: Right quantized matrix
        config: GEMM configuration (defaults to 24-row kernel, signed16)

    Returns:
        CorrectedResult with exact int32 values and scale s_w * s_x

    Raises:
        DimensionMismatchError: If w.cols != x.rows
        OverflowRiskError: If D exceeds the bound of a checked config
    """
    config = config or GemmConfig()
    _check_dims(w, x)
    return qgemm_prepared(prepare_weights(w, config), x, config)


def qgemm_prepared(
    prepared: PreparedWeights, x: QuantizedMatrix, config: Optional[GemmConfig] = None
) -> CorrectedResult:
    """Quantized product reusing a PreparedWeights left operand."""
    config = config or GemmConfig()
    if config.accumulator_mode == AccumulatorMode.I32:
        return qgemm_u8(prepared.matrix, x, prepared.row_depth_sums)
    _check_dims(prepared.matrix, x)
    _check_bits(x, config)
    if prepared.kernel_height != config.kernel_height:
        logger.debug(
            f"Weights prepared for kernel height {prepared.kernel_height}, "
            f"config asks for {config.kernel_height}; using the prepared layout"
        )

    depth = x.rows
    check_depth(depth, config)
    packed_x = pack_rhs(x)
    raw = _raw_product(prepared, x, packed_x, config)

    values = _apply_corrections(
        raw,
        depth,
        prepared.params.zero_point,
        x.params.zero_point,
        prepared.row_depth_sums,
        packed_x.col_depth_sums,
    )
    return CorrectedResult(values, prepared.params.scale * x.params.scale)


def qgemm_u8(
    w: QuantizedMatrix,
    x: QuantizedMatrix,
    row_depth_sums: Optional[np.ndarray] = None,
) -> CorrectedResult:
    """
    Quantized product of 8-bit operands with 32-bit accumulation.

    Args:
        w: Left 8-bit quantized matrix
        x: Right 8-bit quantized matrix
        row_depth_sums: Cached per-row sums of w, computed when omitted

    Raises:
        QuantizationError: If either operand is not 8-bit
        DimensionMismatchError: If w.cols != x.rows
        OverflowRiskError: If D exceeds the 32-bit bound
    """
    config = GemmConfig.for_u8()
    _check_bits(w, config)
    _check_bits(x, config)
    _check_dims(w, x)
    depth = x.rows
    check_depth(depth, config)

    raw = w.data.astype(np.int32) @ x.data.astype(np.int32)
    if row_depth_sums is None:
        row_depth_sums = w.depth_sums(axis=1)
    values = _apply_corrections(
        raw,
        depth,
        w.params.zero_point,
        x.params.zero_point,
        row_depth_sums,
        x.depth_sums(axis=0),
    )
    return CorrectedResult(values, w.params.scale * x.params.scale)


def _check_dims(w: QuantizedMatrix, x: QuantizedMatrix) -> None:
    if w.cols != x.rows:
        raise DimensionMismatchError(
            f"Inner dimensions differ: left is {w.rows}x{w.cols}, right is {x.rows}x{x.cols}",
            "The left operand's column count must equal the right operand's row count",
            "depth",
        )


def _check_bits(matrix: QuantizedMatrix, config: GemmConfig) -> None:
    if matrix.params.bits != config.bits:
        raise QuantizationError(
            f"Operand is {matrix.params.bits}-bit but the GEMM expects {config.bits}-bit",
            "Quantize both operands with the same bit-width as the config",
            "bits",
        )


def _raw_product(
    prepared: PreparedWeights,
    x: QuantizedMatrix,
    packed_x: PackedRhs,
    config: GemmConfig,
) -> np.ndarray:
    rows, cols = prepared.rows, x.cols
    raw = np.zeros((rows, cols), dtype=np.int32)
    full_panels = cols // RHS_PANEL_WIDTH
    full_cols = full_panels * RHS_PANEL_WIDTH
    kernel_rows = prepared.kernel_rows
    mode = config.accumulator_mode

    if full_panels and kernel_rows:
        chunks = _split_panels(full_panels, config.workers)
        if len(chunks) == 1:
            _run_panels(prepared, packed_x, raw, chunks[0], config)
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                futures = [
                    pool.submit(_run_panels, prepared, packed_x, raw, chunk, config)
                    for chunk in chunks
                ]
                for future in futures:
                    future.result()

    # Columns past the last full panel and rows past the last full 8-row panel
    if full_cols < cols and kernel_rows:
        raw[:kernel_rows, full_cols:] = _lane_product(
            prepared.matrix.data[:kernel_rows], x.data[:, full_cols:], mode
        )
    if kernel_rows < rows:
        raw[kernel_rows:, :] = _lane_product(
            prepared.matrix.data[kernel_rows:], x.data, mode
        )
    return raw


def _run_panels(
    prepared: PreparedWeights,
    packed_x: PackedRhs,
    raw: np.ndarray,
    panel_range: range,
    config: GemmConfig,
) -> None:
    regions: List[Tuple[Optional[PackedLhs], int]] = [
        (prepared.big, 0),
        (prepared.small, prepared.big_rows),
    ]
    depth = packed_x.padded_depth
    for col_panel in panel_range:
        rhs_panel = packed_x.panel(col_panel)
        col = col_panel * RHS_PANEL_WIDTH
        for packed, row_offset in regions:
            if packed is None:
                continue
            height = packed.kernel_height
            for row_panel in range(packed.panel_count):
                tile = AccumulatorTile.zeros(height)
                microkernel(tile, packed.panel(row_panel), rhs_panel, depth, config.backend)
                row = row_offset + row_panel * height
                raw[row:row + height, col:col + RHS_PANEL_WIDTH] = tile.widen(
                    config.accumulator_mode
                )


def _split_panels(panels: int, workers: int) -> List[range]:
    workers = max(1, min(workers, panels))
    bounds = np.linspace(0, panels, workers + 1).astype(int)
    return [range(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _lane_product(lhs: np.ndarray, rhs: np.ndarray, mode: AccumulatorMode) -> np.ndarray:
    """Raw product of unpacked edges, accumulated in the same 16-bit lanes."""
    lanes = lhs.astype(np.uint16) @ rhs.astype(np.uint16)
    return widen_lanes(lanes, mode)


def _apply_corrections(
    raw: np.ndarray,
    depth: int,
    z_w: int,
    z_x: int,
    row_depth_sums: np.ndarray,
    col_depth_sums: np.ndarray,
) -> np.ndarray:
    corrected = (
        raw.astype(np.int64)
        - z_w * np.asarray(col_depth_sums, dtype=np.int64)[None, :]
        - z_x * np.asarray(row_depth_sums, dtype=np.int64)[:, None]
        + depth * z_x * z_w
    )
    return corrected.astype(np.int32)
