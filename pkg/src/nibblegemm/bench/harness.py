"""
Benchmark and Verification Harness

Times every (height, width, depth, engine) point of a grid and writes the
results as CSV, or checks every engine against the reference oracles.

Timing protocol for one point:

1. run the engine `warmup` times (not recorded);
2. double the batch size until one batch takes at least 1 ms;
3. record per-call batch times until the relative standard deviation of
   the mean, (stdev / sqrt(n)) / mean, drops below target_cv or max_reps
   samples were taken. The latter case is flagged "unstable".
"""

import csv
import logging
import math
import os
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from ..gemm import AccumulatorMode
from ..nn import (
    Tensor,
    build_demo_network,
    float_forward,
    network_forward,
    reference_conv_forward,
)
from ..reference import (
    OracleReport,
    compare_close,
    compare_exact,
    oracle_gemm_f32,
    oracle_gemm_i32,
    oracle_quantized_product,
)
from .config import BenchConfig
from .engines import (
    Engine,
    EngineThunk,
    GemmProblem,
    checksum,
    engine_flags,
    make_problem,
    prepare_engine,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("height", "width", "depth", "engine", "mean_us", "cv", "reps", "checksum")
MAX_BATCH = 1 << 20
MIN_SAMPLES = 3

Clock = Callable[[], float]
EngineOverrides = Mapping[Engine, Callable[[GemmProblem], EngineThunk]]


@dataclass
class TimingResult:
    mean_us: float
    cv: float
    reps: int
    batch: int
    stable: bool
    result: object = None


@dataclass
class BenchRecord:
    """One CSV row: mean time per call in microseconds at one grid point."""
    height: int
    width: int
    depth: int
    engine: str
    mean_us: float
    cv: float
    reps: int
    checksum: float
    flags: List[str] = field(default_factory=list)

    def csv_row(self) -> Tuple:
        return (
            self.height,
            self.width,
            self.depth,
            self.engine,
            f"{self.mean_us:.3f}",
            f"{self.cv:.5f}",
            self.reps,
            repr(self.checksum),
        )


def relative_error_of_mean(samples: List[float]) -> float:
    """(stdev / sqrt(n)) / mean; infinite with fewer than two samples."""
    if len(samples) < 2:
        return math.inf
    mean = statistics.fmean(samples)
    if mean <= 0:
        return 0.0
    return statistics.stdev(samples) / math.sqrt(len(samples)) / mean


def time_thunk(
    thunk: Callable[[], object],
    target_cv: float,
    max_reps: int,
    warmup: int = 3,
    min_batch_seconds: float = 1e-3,
    clock: Clock = time.perf_counter,
) -> TimingResult:
    """
    Measure the mean time of one call of `thunk`.

    Args:
        thunk: Work to time; its last return value is kept in the result
        target_cv: Stop once the relative standard deviation of the mean is below this
        max_reps: Upper bound on recorded samples
        warmup: Untimed calls before measuring
        min_batch_seconds: Minimum duration of one timed batch
        clock: Monotonic clock in seconds

    Returns:
        TimingResult with the mean in microseconds
    """
    result = None
    for _ in range(warmup):
        result = thunk()

    batch = 1
    while True:
        start = clock()
        for _ in range(batch):
            result = thunk()
        elapsed = clock() - start
        if elapsed >= min_batch_seconds or batch >= MAX_BATCH:
            break
        batch *= 2

    samples = [elapsed / batch]
    cv = math.inf
    while len(samples) < max_reps:
        start = clock()
        for _ in range(batch):
            result = thunk()
        samples.append((clock() - start) / batch)
        cv = relative_error_of_mean(samples)
        if len(samples) >= min(MIN_SAMPLES, max_reps) and cv < target_cv:
            break

    stable = cv < target_cv
    return TimingResult(
        mean_us=statistics.fmean(samples) * 1e6,
        cv=cv if math.isfinite(cv) else 0.0,
        reps=len(samples),
        batch=batch,
        stable=stable,
        result=result,
    )


def grid_points(config: BenchConfig) -> Iterator[Tuple[int, int, int]]:
    for height in config.heights:
        for width in config.widths:
            for depth in config.depths:
                yield height, width, depth


def pin_to_cpu(core: Optional[int]) -> bool:
    """Pin the process to one core where the platform allows it."""
    if core is None:
        return False
    if not hasattr(os, "sched_setaffinity"):
        logger.warning("CPU pinning is not available on this platform; continuing unpinned")
        return False
    try:
        os.sched_setaffinity(0, {core})
    except OSError as e:
        logger.warning(f"Could not pin to CPU {core}: {e}; continuing unpinned")
        return False
    logger.info(f"Pinned benchmark process to CPU {core}")
    return True


def run_benchmark(
    config: BenchConfig,
    overrides: Optional[EngineOverrides] = None,
    clock: Clock = time.perf_counter,
) -> List[BenchRecord]:
    """
    Time every engine at every grid point and write the CSV if configured.

    Returns:
        One BenchRecord per (point, engine), in grid order
    """
    pin_to_cpu(config.pin_cpu)
    records: List[BenchRecord] = []
    total = config.grid_size * len(config.engines)
    logger.info(
        f"Benchmarking {config.grid_size} grid points x {len(config.engines)} engines "
        f"(target cv {config.target_cv:g}, max {config.max_reps} reps)"
    )

    for height, width, depth in grid_points(config):
        problem = make_problem(height, width, depth, config.seed)
        for engine in config.engines:
            thunk = prepare_engine(engine, problem, overrides)
            timing = time_thunk(
                thunk,
                config.target_cv,
                config.max_reps,
                config.warmup,
                config.min_batch_seconds,
                clock,
            )
            flags = engine_flags(engine, problem)
            if not timing.stable:
                flags.append("unstable")
            record = BenchRecord(
                height=height,
                width=width,
                depth=depth,
                engine=engine.value,
                mean_us=timing.mean_us,
                cv=timing.cv,
                reps=timing.reps,
                checksum=checksum(np.asarray(timing.result)),
                flags=flags,
            )
            records.append(record)
            note = f" [{', '.join(flags)}]" if flags else ""
            logger.info(
                f"[{len(records)}/{total}] {height}x{width}x{depth} {engine.value}: "
                f"{record.mean_us:.2f} us (cv {record.cv:.4f}, {record.reps} reps){note}"
            )
            if "unstable" in flags:
                logger.warning(
                    f"{height}x{width}x{depth} {engine.value} did not reach cv "
                    f"{config.target_cv:g} within {config.max_reps} reps"
                )

    if config.csv_path is not None:
        write_csv(records, config.csv_path)
    return records


def write_csv(records: List[BenchRecord], path: Union[str, Path]) -> Path:
    """Write records with the fixed header height,width,depth,engine,mean_us,cv,reps,checksum."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.csv_row())
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def read_csv(path: Union[str, Path]) -> List[BenchRecord]:
    """Read a CSV written by write_csv()."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return [
            BenchRecord(
                height=int(row["height"]),
                width=int(row["width"]),
                depth=int(row["depth"]),
                engine=row["engine"],
                mean_us=float(row["mean_us"]),
                cv=float(row["cv"]),
                reps=int(row["reps"]),
                checksum=float(row["checksum"]),
            )
            for row in csv.DictReader(handle)
        ]


def speedups(
    records: List[BenchRecord], baseline: str = Engine.F32.value, target: str = Engine.U4.value
) -> List[Tuple[Tuple[int, int, int], float]]:
    """baseline_time / target_time for every point that has both engines."""
    times = {(r.height, r.width, r.depth, r.engine): r.mean_us for r in records}
    ratios = []
    for (h, w, d, engine), base in times.items():
        if engine != baseline:
            continue
        other = times.get((h, w, d, target))
        if other:
            ratios.append(((h, w, d), base / other))
    return ratios


@dataclass
class VerifyResult:
    height: int
    width: int
    depth: int
    engine: str
    report: OracleReport


@dataclass
class VerifyReport:
    """Oracle comparison of every engine at every grid point."""
    results: List[VerifyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.report.passed for r in self.results)

    @property
    def failures(self) -> List[VerifyResult]:
        return [r for r in self.results if not r.report.passed]


def _oracle(engine: Engine, problem: GemmProblem) -> Callable[[np.ndarray], OracleReport]:
    if engine == Engine.U4:
        w, x = problem.w4, problem.x4
    else:
        w, x = problem.w8, problem.x8
    if engine in (Engine.U4, Engine.U8):
        expected = oracle_quantized_product(w.data, w.params.zero_point, x.data, x.params.zero_point)
        return lambda actual: compare_exact(actual, expected)
    if engine == Engine.I32:
        expected = oracle_gemm_i32(w.data, x.data)
        return lambda actual: compare_exact(actual, expected)
    expected_f = oracle_gemm_f32(problem.a, problem.b)
    return lambda actual: compare_close(actual, expected_f)


def verify_engines(
    config: BenchConfig, overrides: Optional[EngineOverrides] = None
) -> VerifyReport:
    """
    Compare every engine against its oracle at every grid point.

    U4 and U8 must equal the direct quantized product exactly, I32 the
    naive integer product exactly, and F32 the naive float product within
    a relative tolerance of 1e-5.
    """
    report = VerifyReport()
    for height, width, depth in grid_points(config):
        problem = make_problem(height, width, depth, config.seed)
        for engine in config.engines:
            actual = prepare_engine(engine, problem, overrides)()
            outcome = _oracle(engine, problem)(np.asarray(actual))
            report.results.append(VerifyResult(height, width, depth, engine.value, outcome))
            if outcome.passed:
                logger.info(f"{height}x{width}x{depth} {engine.value}: {outcome.describe()}")
            else:
                logger.error(f"{height}x{width}x{depth} {engine.value}: {outcome.describe()}")
    logger.info(
        f"Verification {'passed' if report.passed else 'FAILED'}: "
        f"{len(report.results) - len(report.failures)}/{len(report.results)} checks matched"
    )
    return report


@dataclass
class SanityResult:
    u4_us: float
    naive_us: float

    @property
    def ok(self) -> bool:
        return self.u4_us <= self.naive_us


def run_sanity(
    height: int = 24,
    width: int = 1600,
    depth: int = 100,
    seed: int = 0,
    max_reps: int = 5,
    clock: Clock = time.perf_counter,
) -> SanityResult:
    """
    Informational floor: U4 should not be slower than the naive 32-bit
    integer product at 24x1600x100.
    """
    problem = make_problem(height, width, depth, seed)
    u4 = time_thunk(prepare_engine(Engine.U4, problem), 0.05, max_reps, 1, clock=clock)
    w, x = problem.w4.data, problem.x4.data
    naive = time_thunk(lambda: oracle_gemm_i32(w, x), 0.05, max_reps, 0, clock=clock)
    result = SanityResult(u4.mean_us, naive.mean_us)
    verdict = "ok" if result.ok else "u4 is SLOWER than the naive product"
    logger.info(
        f"Sanity {height}x{width}x{depth}: u4 {result.u4_us:.1f} us, "
        f"naive i32 {result.naive_us:.1f} us ({verdict})"
    )
    return result


@dataclass
class DemoRecord:
    """Forward-pass time of the demo network under one inference setting."""
    setting: str
    mean_us: float
    cv: float
    reps: int
    top_class: int


def run_demo(
    seed: int = 0,
    target_cv: float = 0.01,
    max_reps: int = 20,
    warmup: int = 1,
    clock: Clock = time.perf_counter,
) -> List[DemoRecord]:
    """Time one forward pass of the demo network per inference setting."""
    rng = np.random.default_rng(seed)
    net4 = build_demo_network(seed, bits=4, accumulator_mode=AccumulatorMode.SIGNED16)
    net8 = net4.with_settings(bits=8, accumulator_mode=AccumulatorMode.I32)
    image = Tensor(rng.uniform(0.0, 1.0, size=net4.input_shape))

    settings: List[Tuple[str, Callable[[], np.ndarray]]] = [
        ("float", lambda: float_forward(net4, image)),
        ("u8", lambda: network_forward(net8, image)),
        ("u4", lambda: network_forward(net4, image)),
        ("i32-naive", lambda: network_forward(net8, image, reference_conv_forward)),
    ]
    records = []
    for name, thunk in settings:
        timing = time_thunk(thunk, target_cv, max_reps, warmup, clock=clock)
        top = int(np.argmax(np.asarray(timing.result)))
        records.append(DemoRecord(name, timing.mean_us, timing.cv, timing.reps, top))
        logger.info(
            f"demo {name}: {timing.mean_us / 1000:.3f} ms per forward pass "
            f"(cv {timing.cv:.4f}, {timing.reps} reps), top class {top}"
        )
    return records

