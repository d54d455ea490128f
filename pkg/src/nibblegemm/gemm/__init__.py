"""
nibblegemm GEMM Core

Linear quantization, kernel-ordered packing, the 16-bit micro-kernels and
the corrected quantized GEMM driver.
"""

# Quantization
from .quant import (
    QuantParams,
    QuantizedMatrix,
    compute_quant_params,
    quantize,
    dequantize,
    quantize_array,
    dequantize_array,
    quantize_tensor,
)

# Packing
from .pack import (
    RHS_PANEL_WIDTH,
    DEPTH_STEP,
    PackedRhs,
    PackedLhs,
    pack_rhs,
    pack_lhs,
    unpack_rhs,
    unpack_lhs,
)

# Micro-kernels
from .kernel import (
    AccumulatorMode,
    KernelBackend,
    AccumulatorTile,
    microkernel,
    widen_lanes,
)

# Driver
from .qgemm import (
    GemmConfig,
    CorrectedResult,
    PreparedWeights,
    max_safe_depth,
    conv_channel_limit,
    channel_limit,
    select_accumulator_mode,
    check_depth,
    prepare_weights,
    qgemm,
    qgemm_prepared,
    qgemm_u8,
)

__all__ = [
    # Quantization
    "QuantParams",
    "QuantizedMatrix",
    "compute_quant_params",
    "quantize",
    "dequantize",
    "quantize_array",
    "dequantize_array",
    "quantize_tensor",

    # Packing
    "RHS_PANEL_WIDTH",
    "DEPTH_STEP",
    "PackedRhs",
    "PackedLhs",
    "pack_rhs",
    "pack_lhs",
    "unpack_rhs",
    "unpack_lhs",

    # Micro-kernels
    "AccumulatorMode",
    "KernelBackend",
    "AccumulatorTile",
    "microkernel",
    "widen_lanes",

    # Driver
    "GemmConfig",
    "CorrectedResult",
    "PreparedWeights",
    "max_safe_depth",
    "conv_channel_limit",
    "channel_limit",
    "select_accumulator_mode",
    "check_depth",
    "prepare_weights",
    "qgemm",
    "qgemm_prepared",
    "qgemm_u8",
]
