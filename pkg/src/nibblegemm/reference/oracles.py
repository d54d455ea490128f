"""
Reference Oracles

Brute-force matrix products used to check the packed GEMM path. They work
on plain Python lists with a naive triple loop, so they share nothing with
the packing, kernels or lane widening they are meant to verify.
"""

import logging
import operator
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..validation import DimensionMismatchError, OracleError

logger = logging.getLogger(__name__)

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1

Matrix = List[List]


@dataclass(frozen=True)
class OracleReport:
    """Outcome of comparing an engine's result against an oracle."""
    max_abs_diff: float
    first_mismatch: Optional[Tuple[int, int]]
    passed: bool
    tolerance: float = 0.0

    def describe(self) -> str:
        if self.passed:
            return f"match (max |diff| = {self.max_abs_diff:g})"
        where = (
            f"first mismatch at {self.first_mismatch}"
            if self.first_mismatch is not None
            else "shape mismatch"
        )
        return f"MISMATCH: {where}, max |diff| = {self.max_abs_diff:g}"


def _as_rows(matrix, field: str) -> Matrix:
    if hasattr(matrix, "tolist"):
        matrix = matrix.tolist()
    rows = [list(row) for row in matrix]
    if rows and any(len(row) != len(rows[0]) for row in rows):
        raise OracleError(
            f"{field} is ragged",
            "Pass a rectangular 2-D matrix",
            field,
        )
    return rows


def _inner_dims(a: Matrix, b: Matrix, b_rows: int) -> int:
    depth = len(a[0]) if a else 0
    if a and depth != b_rows:
        raise DimensionMismatchError(
            f"Inner dimensions differ: {len(a)}x{depth} times {b_rows}x?",
            "The left operand's column count must equal the right operand's row count",
            "depth",
        )
    return depth


def _naive_product(a: Matrix, b: Matrix) -> Matrix:
    b_rows = len(b)
    _inner_dims(a, b, b_rows)
    cols = len(b[0]) if b else 0
    columns = [[b[k][j] for k in range(b_rows)] for j in range(cols)]
    return [[sum(map(operator.mul, row, column)) for column in columns] for row in a]


def oracle_gemm_f32(a, b) -> Matrix:
    """
    Real-valued product by a naive triple loop.

    Raises:
        DimensionMismatchError: If a's column count differs from b's row count
    """
    left = [[float(v) for v in row] for row in _as_rows(a, "a")]
    right = [[float(v) for v in row] for row in _as_rows(b, "b")]
    return _naive_product(left, right)


def oracle_gemm_i32(a, b) -> Matrix:
    """
    Exact integer product by a naive triple loop.

    Raises:
        DimensionMismatchError: If a's column count differs from b's row count
        OracleError: If a result does not fit in 32-bit signed integers
    """
    left = [[int(v) for v in row] for row in _as_rows(a, "a")]
    right = [[int(v) for v in row] for row in _as_rows(b, "b")]
    return _check_int32(_naive_product(left, right))


def oracle_quantized_product(w_hat, z_w: int, x_hat, z_x: int) -> Matrix:
    """
    Integer part of the quantized product, taken directly:
    sum over k of (w_hat[i][k] - z_w) * (x_hat[k][j] - z_x).

    Args:
        w_hat: Quantized left matrix (M x D), integers
        z_w: Zero-point of the left matrix
        x_hat: Quantized right matrix (D x N), integers
        z_x: Zero-point of the right matrix

    Returns:
        M x N list of Python ints

    Raises:
        DimensionMismatchError: If the inner dimensions differ
        OracleError: If a result does not fit in 32-bit signed integers
    """
    left = [[int(v) - int(z_w) for v in row] for row in _as_rows(w_hat, "w_hat")]
    right = [[int(v) - int(z_x) for v in row] for row in _as_rows(x_hat, "x_hat")]
    return _check_int32(_naive_product(left, right))


def _check_int32(result: Matrix) -> Matrix:
    for i, row in enumerate(result):
        for j, value in enumerate(row):
            if not INT32_MIN <= value <= INT32_MAX:
                raise OracleError(
                    f"Entry ({i}, {j}) = {value} does not fit in 32-bit integers",
                    "Use smaller operands or a shorter depth",
                    "result",
                )
    return result


def compare_exact(actual, expected) -> OracleReport:
    """Element-wise exact comparison; passes only when every entry is equal."""
    got = _as_rows(actual, "actual")
    want = _as_rows(expected, "expected")
    if not _same_shape(got, want):
        return OracleReport(float("inf"), None, False)

    max_diff = 0
    first = None
    for i, (row_got, row_want) in enumerate(zip(got, want)):
        for j, (g, w) in enumerate(zip(row_got, row_want)):
            diff = abs(int(g) - int(w))
            if diff and first is None:
                first = (i, j)
            max_diff = max(max_diff, diff)
    return OracleReport(float(max_diff), first, max_diff == 0)


def compare_close(actual, expected, rtol: float = 1e-5) -> OracleReport:
    """
    Element-wise comparison with a relative tolerance.

    The tolerance is relative to the largest reference magnitude (at least
    1.0), so a single entry that cancels to near zero is not held to a
    tighter bound than its neighbours.
    """
    got = _as_rows(actual, "actual")
    want = _as_rows(expected, "expected")
    if not _same_shape(got, want):
        return OracleReport(float("inf"), None, False, rtol)

    magnitude = max((abs(float(v)) for row in want for v in row), default=0.0)
    bound = rtol * max(magnitude, 1.0)
    max_diff = 0.0
    first = None
    for i, (row_got, row_want) in enumerate(zip(got, want)):
        for j, (g, w) in enumerate(zip(row_got, row_want)):
            diff = abs(float(g) - float(w))
            if diff > bound and first is None:
                first = (i, j)
            max_diff = max(max_diff, diff)
    return OracleReport(max_diff, first, first is None, rtol)


def _same_shape(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    if len(a) != len(b):
        return False
    return all(len(row_a) == len(row_b) for row_a, row_b in zip(a, b))
