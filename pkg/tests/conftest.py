"""
Pytest configuration and fixtures for nibblegemm tests.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from nibblegemm.bench import build_bench_config
from nibblegemm.gemm import QuantizedMatrix
from nibblegemm.nn import build_demo_network, build_toy_classifier


@pytest.fixture
def rng():
    """Seeded generator so failures reproduce."""
    return np.random.default_rng(1234)


@pytest.fixture
def worked_example():
    """W = [[3, 5]] (z=1, s=0.5) and X = [[2], [7]] (z=2, s=0.25); corrected product 20."""
    w = QuantizedMatrix.from_integers([[3, 5]], scale=0.5, zero_point=1)
    x = QuantizedMatrix.from_integers([[2], [7]], scale=0.25, zero_point=2)
    return w, x


@pytest.fixture
def random_nibbles(rng):
    """Factory for random 4-bit matrices with random zero-points."""

    def make(rows: int, cols: int) -> QuantizedMatrix:
        data = rng.integers(0, 16, size=(rows, cols))
        return QuantizedMatrix.from_integers(
            data, scale=float(rng.uniform(0.01, 1.0)), zero_point=int(rng.integers(0, 16))
        )

    return make


@pytest.fixture(scope="session")
def demo_network():
    """The seeded 7-layer demo network at 4 bits, signed16."""
    return build_demo_network(seed=0)


@pytest.fixture(scope="session")
def toy_classifier():
    return build_toy_classifier()


@pytest.fixture
def small_bench_config(tmp_path):
    """A two-point grid with all engines and a fast timing protocol."""
    return build_bench_config(
        heights=[8],
        widths=[6, 13],
        depths=[5],
        max_reps=3,
        warmup=0,
        min_batch_seconds=1e-6,
        target_cv=0.5,
        csv_path=tmp_path / "bench.csv",
    )
