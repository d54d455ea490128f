"""
Benchmark Engines

The four matrix multiplication engines compared on the benchmark grid:

- F32: float32 product through numpy (BLAS baseline)
- I32: int32 product of 8-bit operands through numpy
- U8:  corrected 8-bit quantized product with 32-bit accumulation
- U4:  corrected 4-bit quantized product through the packed 16-bit kernels

Each engine is prepared once per grid point and returns a thunk; the
timed region is the thunk, which includes packing and the corrections.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np

from ..gemm import (
    AccumulatorMode,
    GemmConfig,
    QuantizedMatrix,
    compute_quant_params,
    qgemm,
    qgemm_u8,
    quantize,
    select_accumulator_mode,
)

logger = logging.getLogger(__name__)

EngineThunk = Callable[[], np.ndarray]


class Engine(str, Enum):
    """Matrix multiplication engine."""
    F32 = "f32"
    I32 = "i32"
    U8 = "u8"
    U4 = "u4"


ENGINE_NAMES = tuple(engine.value for engine in Engine)


@dataclass(frozen=True)
class GemmProblem:
    """Operands of one grid point: a (height x depth) times b (depth x width)."""
    height: int
    width: int
    depth: int
    a: np.ndarray
    b: np.ndarray
    w4: QuantizedMatrix
    x4: QuantizedMatrix
    w8: QuantizedMatrix
    x8: QuantizedMatrix


def make_problem(height: int, width: int, depth: int, seed: int) -> GemmProblem:
    """
    Random operands for one grid point.

    The generator is seeded from (seed, height, width, depth), so every
    point is reproducible on its own regardless of grid order.
    """
    rng = np.random.default_rng([seed, height, width, depth])
    a = rng.uniform(-1.0, 1.0, size=(height, depth)).astype(np.float32)
    b = rng.uniform(-1.0, 1.0, size=(depth, width)).astype(np.float32)

    def quantized(values: np.ndarray, bits: int) -> QuantizedMatrix:
        return quantize(values, compute_quant_params(values, bits))

    return GemmProblem(
        height, width, depth, a, b,
        quantized(a, 4), quantized(b, 4), quantized(a, 8), quantized(b, 8),
    )


def u4_config(height: int, depth: int) -> GemmConfig:
    """Big kernel for heights of 24 and more; the narrowest safe accumulator mode."""
    return GemmConfig(
        kernel_height=24 if height >= 24 else 8,
        accumulator_mode=select_accumulator_mode(depth),
        bits=4,
    )


def _f32(problem: GemmProblem) -> EngineThunk:
    a, b = problem.a, problem.b
    return lambda: a @ b


def _i32(problem: GemmProblem) -> EngineThunk:
    a = problem.w8.data.astype(np.int32)
    b = problem.x8.data.astype(np.int32)
    return lambda: a @ b


def _u8(problem: GemmProblem) -> EngineThunk:
    w, x = problem.w8, problem.x8
    return lambda: qgemm_u8(w, x).values


def _u4(problem: GemmProblem) -> EngineThunk:
    w, x = problem.w4, problem.x4
    config = u4_config(problem.height, problem.depth)
    return lambda: qgemm(w, x, config).values


ENGINES: Dict[Engine, Callable[[GemmProblem], EngineThunk]] = {
    Engine.F32: _f32,
    Engine.I32: _i32,
    Engine.U8: _u8,
    Engine.U4: _u4,
}


def prepare_engine(
    engine: Engine,
    problem: GemmProblem,
    overrides: Optional[Mapping[Engine, Callable[[GemmProblem], EngineThunk]]] = None,
) -> EngineThunk:
    """Return the thunk computing `engine` on `problem`."""
    factories = {**ENGINES, **(overrides or {})}
    return factories[Engine(engine)](problem)


def engine_flags(engine: Engine, problem: GemmProblem) -> List[str]:
    """Notes recorded alongside a measurement."""
    if engine == Engine.U4:
        mode = u4_config(problem.height, problem.depth).accumulator_mode
        if mode == AccumulatorMode.UNSIGNED16_EXTENDED:
            return ["u16-extended"]
    return []


def checksum(result: np.ndarray) -> float:
    """Sum of the result entries; keeps the product observable."""
    return float(np.sum(result, dtype=np.float64))
