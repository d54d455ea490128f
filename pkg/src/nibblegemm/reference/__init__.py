"""
nibblegemm Reference Oracles

Naive, kernel-free products and comparison reports used by the tests and
the `verify` command.
"""

from .oracles import (
    OracleReport,
    oracle_gemm_f32,
    oracle_gemm_i32,
    oracle_quantized_product,
    compare_exact,
    compare_close,
)

__all__ = [
    "OracleReport",
    "oracle_gemm_f32",
    "oracle_gemm_i32",
    "oracle_quantized_product",
    "compare_exact",
    "compare_close",
]
