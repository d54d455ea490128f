"""
Tests for Operand Packing
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nibblegemm.gemm import (
    PackedLhs,
    PackedRhs,
    QuantizedMatrix,
    pack_lhs,
    pack_rhs,
    unpack_lhs,
    unpack_rhs,
)
from nibblegemm.validation import KernelError, PackingError


def _nibbles(values) -> QuantizedMatrix:
    return QuantizedMatrix.from_integers(values, scale=1.0, zero_point=0)


class TestPackRhs:
    """Right operand: 4-column panels, two depth levels at a time."""

    def test_square_layout(self):
        packed = pack_rhs(_nibbles(np.arange(16).reshape(4, 4)))

        assert packed.buffer.tolist() == [0, 4, 1, 5, 2, 6, 3, 7, 8, 12, 9, 13, 10, 14, 11, 15]
        assert packed.padded_depth == 4
        assert packed.panel_count == 1

    def test_odd_depth_pads_with_zero(self):
        packed = pack_rhs(_nibbles([[1, 2, 3, 4]]))

        assert packed.buffer.tolist() == [1, 0, 2, 0, 3, 0, 4, 0]
        assert packed.depth == 1
        assert packed.padded_depth == 2

    def test_partial_panel_pads_columns(self):
        packed = pack_rhs(_nibbles(np.ones((2, 5), dtype=int)))

        assert packed.cols == 5
        assert packed.cols_packed == 8
        assert packed.panel_count == 2
        assert packed.panel(1).tolist() == [1, 1, 0, 0, 0, 0, 0, 0]

    def test_column_depth_sums_ignore_padding(self):
        packed = pack_rhs(_nibbles([[1, 2, 3], [4, 5, 6], [7, 8, 9]]))

        assert packed.col_depth_sums.tolist() == [12, 15, 18]

    def test_buffer_is_read_only(self):
        packed = pack_rhs(_nibbles(np.zeros((2, 4), dtype=int)))
        with pytest.raises(ValueError):
            packed.buffer[0] = 1


class TestPackLhs:
    """Left operand: 8-lane groups per depth level."""

    def test_small_kernel_layout(self):
        data = np.arange(16).reshape(8, 2) % 16
        packed = pack_lhs(_nibbles(data), 8)

        assert packed.buffer.tolist() == data[:, 0].tolist() + data[:, 1].tolist()
        assert packed.panel_count == 1

    def test_big_kernel_layout(self):
        data = (np.arange(48).reshape(24, 2) % 16).astype(int)
        packed = pack_lhs(_nibbles(data), 24)

        expected = []
        for block in range(3):
            rows = slice(block * 8, block * 8 + 8)
            expected += data[rows, 0].tolist() + data[rows, 1].tolist()
        assert packed.buffer.tolist() == expected

    def test_short_matrix_pads_rows(self):
        packed = pack_lhs(_nibbles([[3, 5]]), 8)

        assert packed.rows == 1
        assert packed.rows_packed == 8
        assert packed.buffer.tolist() == [3] + [0] * 7 + [5] + [0] * 7

    def test_row_depth_sums(self):
        packed = pack_lhs(_nibbles([[1, 2, 3], [4, 5, 6]]), 8)

        assert packed.row_depth_sums.tolist() == [6, 15]

    def test_rejects_other_kernel_heights(self):
        with pytest.raises(KernelError):
            pack_lhs(_nibbles([[1]]), 16)


class TestUnpack:
    def test_rhs_wrong_buffer_size(self):
        packed = pack_rhs(_nibbles(np.ones((2, 4), dtype=int)))
        broken = PackedRhs(packed.buffer[:-1], packed.depth, packed.cols_packed, packed.col_depth_sums)

        with pytest.raises(PackingError, match="expected 8"):
            unpack_rhs(broken)

    def test_lhs_wrong_buffer_size(self):
        packed = pack_lhs(_nibbles(np.ones((8, 2), dtype=int)), 8)
        broken = PackedLhs(
            packed.buffer[:4], packed.depth, packed.rows_packed, 8, packed.row_depth_sums
        )

        with pytest.raises(PackingError):
            unpack_lhs(broken)


@pytest.mark.property
class TestPackingRoundTrip:
    """Packing is a lossless reordering."""

    @settings(max_examples=150, deadline=None)
    @given(
        rows=st.integers(1, 40),
        cols=st.integers(1, 40),
        kernel_height=st.sampled_from([8, 24]),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_unpack_restores_operands(self, rows, cols, kernel_height, seed):
        rng = np.random.default_rng(seed)
        w = _nibbles(rng.integers(0, 16, size=(rows, cols)))
        x = _nibbles(rng.integers(0, 16, size=(rows, cols)))

        packed_lhs = pack_lhs(w, kernel_height)
        packed_rhs = pack_rhs(x)

        assert np.array_equal(unpack_lhs(packed_lhs), w.data)
        assert np.array_equal(unpack_rhs(packed_rhs), x.data)
        assert packed_lhs.buffer.size == packed_lhs.rows_packed * packed_lhs.padded_depth
        assert int(packed_lhs.buffer.astype(np.int64).sum()) == int(w.data.astype(np.int64).sum())
        assert packed_rhs.col_depth_sums.tolist() == x.data.astype(np.int64).sum(axis=0).tolist()
