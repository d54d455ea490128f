"""
nibblegemm Benchmarks

Matrix multiplication engines, the timing protocol, CSV output, oracle
verification and the demo network timings behind the command line.
"""

# Engines
from .engines import Engine, ENGINE_NAMES, GemmProblem, make_problem, prepare_engine, u4_config

# Configuration
from .config import BenchConfig, build_bench_config

# Harness
from .harness import (
    CSV_HEADER,
    BenchRecord,
    TimingResult,
    VerifyReport,
    VerifyResult,
    SanityResult,
    DemoRecord,
    time_thunk,
    relative_error_of_mean,
    run_benchmark,
    write_csv,
    read_csv,
    speedups,
    verify_engines,
    run_sanity,
    run_demo,
    pin_to_cpu,
)

# Report
from .report import REFERENCE_US, format_time, render_timing_table

__all__ = [
    # Engines
    "Engine",
    "ENGINE_NAMES",
    "GemmProblem",
    "make_problem",
    "prepare_engine",
    "u4_config",

    # Configuration
    "BenchConfig",
    "build_bench_config",

    # Harness
    "CSV_HEADER",
    "BenchRecord",
    "TimingResult",
    "VerifyReport",
    "VerifyResult",
    "SanityResult",
    "DemoRecord",
    "time_thunk",
    "relative_error_of_mean",
    "run_benchmark",
    "write_csv",
    "read_csv",
    "speedups",
    "verify_engines",
    "run_sanity",
    "run_demo",
    "pin_to_cpu",

    # Report
    "REFERENCE_US",
    "format_time",
    "render_timing_table",
]
