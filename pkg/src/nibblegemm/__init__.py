"""
nibblegemm

4-bit quantized matrix multiplication for CNN inference: linear
quantization, kernel-ordered packing, 16-bit accumulator micro-kernels, an
overflow-guarded corrected GEMM, an 8-bit comparison path and a mixed
float/quantized network engine.
"""

__version__ = "0.1.0"
__description__ = "4-bit quantized GEMM with 16-bit accumulators and a quantized CNN engine"

from .gemm import (
    AccumulatorMode,
    GemmConfig,
    QuantParams,
    QuantizedMatrix,
    compute_quant_params,
    quantize,
    dequantize,
    qgemm,
    qgemm_u8,
    max_safe_depth,
    conv_channel_limit,
)
from .validation import NibbleGemmError

__all__ = [
    "__version__",
    "AccumulatorMode",
    "GemmConfig",
    "QuantParams",
    "QuantizedMatrix",
    "compute_quant_params",
    "quantize",
    "dequantize",
    "qgemm",
    "qgemm_u8",
    "max_safe_depth",
    "conv_channel_limit",
    "NibbleGemmError",
]
