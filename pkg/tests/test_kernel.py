"""
Tests for the Micro-Kernels
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nibblegemm.gemm import (
    AccumulatorMode,
    AccumulatorTile,
    KernelBackend,
    QuantizedMatrix,
    microkernel,
    pack_lhs,
    pack_rhs,
    widen_lanes,
)
from nibblegemm.validation import KernelError

BACKENDS = [KernelBackend.VECTOR, KernelBackend.SCALAR]


def _panels(w_values, x_values, kernel_height):
    w = QuantizedMatrix.from_integers(w_values, 1.0, 0)
    x = QuantizedMatrix.from_integers(x_values, 1.0, 0)
    lhs = pack_lhs(w, kernel_height)
    rhs = pack_rhs(x)
    return lhs.panel(0), rhs.panel(0), lhs.padded_depth


def _run(w_values, x_values, kernel_height=8, backend=KernelBackend.VECTOR):
    lhs, rhs, depth = _panels(w_values, x_values, kernel_height)
    tile = AccumulatorTile.zeros(kernel_height)
    return microkernel(tile, lhs, rhs, depth, backend)


class TestMicrokernel:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_dot_product(self, backend):
        tile = _run([[3, 5]], [[2], [7]], backend=backend)

        assert tile.values[0, 0] == 41
        assert int(tile.values.sum()) == 41

    @pytest.mark.parametrize("backend", BACKENDS)
    @pytest.mark.parametrize("kernel_height", [8, 24])
    def test_largest_safe_depth(self, backend, kernel_height):
        w = np.full((kernel_height, 145), 15)
        x = np.full((145, 4), 15)
        tile = _run(w, x, kernel_height, backend)

        assert tile.widen(AccumulatorMode.SIGNED16).tolist() == [[32625] * 4] * kernel_height

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_zero_panels(self, backend):
        tile = _run(np.zeros((8, 6), dtype=int), np.zeros((6, 4), dtype=int), backend=backend)

        assert not tile.values.any()

    def test_zero_depth_leaves_tile(self):
        tile = AccumulatorTile.zeros(8)
        tile.values[0, 0] = 7
        microkernel(tile, np.zeros(0, dtype=np.uint8), np.zeros(0, dtype=np.uint8), 0)

        assert tile.values[0, 0] == 7

    def test_accumulates_into_existing_tile(self):
        lhs, rhs, depth = _panels([[3, 5]], [[2], [7]], 8)
        tile = AccumulatorTile.zeros(8)
        microkernel(tile, lhs, rhs, depth)
        microkernel(tile, lhs, rhs, depth)

        assert tile.values[0, 0] == 82

    def test_lanes_wrap_modulo_two_to_sixteen(self):
        w = np.full((8, 292), 15)
        x = np.full((292, 4), 15)
        tile = _run(w, x)

        assert int(tile.values[0, 0]) == (292 * 225) % 65536


@pytest.mark.property
class TestBackendsAgree:
    @settings(max_examples=100, deadline=None)
    @given(
        depth=st.integers(1, 80),
        kernel_height=st.sampled_from([8, 24]),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_vector_matches_scalar_and_matmul(self, depth, kernel_height, seed):
        rng = np.random.default_rng(seed)
        w = rng.integers(0, 16, size=(kernel_height, depth))
        x = rng.integers(0, 16, size=(depth, 4))

        vector = _run(w, x, kernel_height, KernelBackend.VECTOR)
        scalar = _run(w, x, kernel_height, KernelBackend.SCALAR)

        assert np.array_equal(vector.values, scalar.values)
        assert np.array_equal(vector.widen(AccumulatorMode.UNSIGNED16_EXTENDED), w @ x)


class TestPanelChecks:
    def test_odd_depth(self):
        tile = AccumulatorTile.zeros(8)
        with pytest.raises(KernelError, match="even"):
            microkernel(tile, np.zeros(24, dtype=np.uint8), np.zeros(12, dtype=np.uint8), 3)

    def test_lhs_size_mismatch(self):
        tile = AccumulatorTile.zeros(8)
        with pytest.raises(KernelError) as exc_info:
            microkernel(tile, np.zeros(10, dtype=np.uint8), np.zeros(8, dtype=np.uint8), 2)
        assert exc_info.value.field == "lhs_panel"

    def test_rhs_size_mismatch(self):
        tile = AccumulatorTile.zeros(8)
        with pytest.raises(KernelError) as exc_info:
            microkernel(tile, np.zeros(16, dtype=np.uint8), np.zeros(6, dtype=np.uint8), 2)
        assert exc_info.value.field == "rhs_panel"

    def test_wrong_tile_dtype(self):
        tile = AccumulatorTile(8, np.zeros((8, 4), dtype=np.int32))
        with pytest.raises(KernelError, match="uint16"):
            microkernel(tile, np.zeros(16, dtype=np.uint8), np.zeros(8, dtype=np.uint8), 2)

    def test_tile_height(self):
        with pytest.raises(KernelError):
            AccumulatorTile.zeros(12)


class TestWidenLanes:
    def test_signed_reinterprets_high_bit(self):
        lanes = np.array([32767, 32768, 65535], dtype=np.uint16)

        assert widen_lanes(lanes, AccumulatorMode.SIGNED16).tolist() == [32767, -32768, -1]

    def test_unsigned_zero_extends(self):
        lanes = np.array([32768, 65535], dtype=np.uint16)

        assert widen_lanes(lanes, AccumulatorMode.UNSIGNED16_EXTENDED).tolist() == [32768, 65535]

    def test_i32_is_not_a_lane_mode(self):
        with pytest.raises(KernelError):
            widen_lanes(np.zeros(1, dtype=np.uint16), AccumulatorMode.I32)
