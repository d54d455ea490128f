"""
nibblegemm Runtime Settings

Environment-driven knobs, validated with pydantic:

    NIBBLEGEMM_LOG_LEVEL   logging level (default INFO)
    NIBBLEGEMM_WORKERS     GEMM column-panel workers outside the benchmark (default 1)
    NIBBLEGEMM_BENCH_CSV   default CSV path of `nibblegemm bench` (default bench.csv)
"""

import logging
import os
import sys
from pathlib import Path
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .validation import BenchConfigError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    workers: int = Field(1, ge=1)
    bench_csv: Path = Path("bench.csv")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"must be one of {', '.join(LOG_LEVELS)}")
        return level

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        """
        Read settings from environment variables.

        Raises:
            BenchConfigError: If a variable holds an invalid value
        """
        env = os.environ if environ is None else environ
        values = {
            key: env[var]
            for key, var in (
                ("log_level", "NIBBLEGEMM_LOG_LEVEL"),
                ("workers", "NIBBLEGEMM_WORKERS"),
                ("bench_csv", "NIBBLEGEMM_BENCH_CSV"),
            )
            if env.get(var)
        }
        try:
            return cls(**values)
        except ValidationError as e:
            first = e.errors()[0]
            field = str(first["loc"][0]) if first["loc"] else "settings"
            raise BenchConfigError(
                f"Invalid NIBBLEGEMM_{field.upper()}: {first['msg']}",
                "Fix or unset the environment variable",
                field,
            )


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger once, on stdout."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler(sys.stdout),
        ],
    )
