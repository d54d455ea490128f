"""
Benchmark Configuration

Validated settings for the `bench`, `verify` and `demo` commands. The
default grid is heights {8, 24} x widths {100, 400, 1600} x depths
{10, 40, 100} over all four engines.
"""

import logging
from pathlib import Path
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..gemm import AccumulatorMode, max_safe_depth
from ..validation import BenchConfigError
from .engines import Engine

logger = logging.getLogger(__name__)

DEFAULT_HEIGHTS = [8, 24]
DEFAULT_WIDTHS = [100, 400, 1600]
DEFAULT_DEPTHS = [10, 40, 100]


class BenchConfig(BaseModel):
    """Grid, engines and timing protocol of one benchmark or verification run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    heights: List[int] = Field(default_factory=lambda: list(DEFAULT_HEIGHTS))
    widths: List[int] = Field(default_factory=lambda: list(DEFAULT_WIDTHS))
    depths: List[int] = Field(default_factory=lambda: list(DEFAULT_DEPTHS))
    engines: List[Engine] = Field(default_factory=lambda: list(Engine))
    target_cv: float = Field(0.01, gt=0.0, description="Relative standard deviation of the mean")
    max_reps: int = Field(200, ge=1)
    seed: int = Field(0, ge=0)
    warmup: int = Field(3, ge=0)
    csv_path: Optional[Path] = None
    min_batch_seconds: float = Field(1e-3, gt=0.0)
    pin_cpu: Optional[int] = Field(None, ge=0)

    @field_validator("heights", "widths", "depths")
    @classmethod
    def _positive_dims(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError("list cannot be empty")
        if any(v < 1 for v in values):
            raise ValueError("entries must be positive")
        return list(dict.fromkeys(values))

    @field_validator("engines")
    @classmethod
    def _some_engines(cls, values: List[Engine]) -> List[Engine]:
        if not values:
            raise ValueError("at least one engine is required")
        return list(dict.fromkeys(values))

    @model_validator(mode="after")
    def _u4_depth_bound(self) -> "BenchConfig":
        limit = max_safe_depth(4, AccumulatorMode.UNSIGNED16_EXTENDED)
        if Engine.U4 in self.engines and max(self.depths) > limit:
            raise ValueError(f"u4 depths must not exceed {limit}")
        return self

    @property
    def grid_size(self) -> int:
        return len(self.heights) * len(self.widths) * len(self.depths)


def build_bench_config(**settings: Any) -> BenchConfig:
    """
    Create a BenchConfig, reporting invalid settings as BenchConfigError.

    Raises:
        BenchConfigError: With the first failing field and the reason
    """
    try:
        return BenchConfig(**settings)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        message = first["msg"]
        raise BenchConfigError(
            f"Invalid {field}: {message}",
            "Check the value against `nibblegemm bench --help`",
            field,
        )
