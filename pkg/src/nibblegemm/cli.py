"""
nibblegemm Command Line

    nibblegemm bench   [grid flags] [--target-cv 0.01] [--max-reps N] [--warmup 3] [--csv PATH] [--pin-cpu CORE]
    nibblegemm verify  [grid flags] [--sanity]
    nibblegemm demo    [--seed S] [--max-reps N] [--target-cv C] [--warmup W]
    nibblegemm infer   [--model PATH] [--input FILE.npy] [--seed S]
    nibblegemm report  [--csv PATH] [--output FILE.md]

Grid flags: --heights 8,24 --widths 100,400,1600 --depths 10,40,100
--engines f32,i32,u8,u4 --seed S.

Exit status: 0 on success, 1 when verification finds a mismatch, 2 on
invalid flags or settings.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .bench import (
    ENGINE_NAMES,
    BenchConfig,
    build_bench_config,
    read_csv,
    render_timing_table,
    run_benchmark,
    run_demo,
    run_sanity,
    speedups,
    verify_engines,
)
from .config import Settings, configure_logging
from .nn import Tensor, build_demo_network, load_model, network_forward
from .validation import NibbleGemmError, parse_int_list, parse_name_list

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--heights", default="8,24", help="Left-matrix heights (default: 8,24)")
    parser.add_argument("--widths", default="100,400,1600", help="Right-matrix widths (default: 100,400,1600)")
    parser.add_argument("--depths", default="10,40,100", help="Inner depths (default: 10,40,100)")
    parser.add_argument(
        "--engines", default=",".join(ENGINE_NAMES), help="Engines to run (default: f32,i32,u8,u4)"
    )
    parser.add_argument("--seed", type=int, default=0, help="Random seed for the operands")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nibblegemm",
        description="4-bit quantized matrix multiplication: benchmarks, verification and demo network",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="Time the engines over a grid and write CSV")
    _add_grid_flags(bench)
    bench.add_argument("--target-cv", type=float, default=0.01, help="Relative std of the mean to reach")
    bench.add_argument("--max-reps", type=int, default=200, help="Maximum timed samples per point")
    bench.add_argument("--warmup", type=int, default=3, help="Untimed runs before measuring")
    bench.add_argument("--csv", type=Path, default=None, help="Output CSV (default: NIBBLEGEMM_BENCH_CSV)")
    bench.add_argument("--pin-cpu", type=int, default=None, metavar="CORE", help="Pin to one CPU core")

    verify = sub.add_parser("verify", help="Check every engine against the reference oracles")
    _add_grid_flags(verify)
    verify.add_argument(
        "--sanity", action="store_true", help="Also time u4 against the naive i32 product (informational)"
    )

    demo = sub.add_parser("demo", help="Time the demo CNN under float, 8-bit, 4-bit and naive inference")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--target-cv", type=float, default=0.01)
    demo.add_argument("--max-reps", type=int, default=20)
    demo.add_argument("--warmup", type=int, default=1)

    infer = sub.add_parser("infer", help="Classify one input with a saved or generated model")
    infer.add_argument("--model", type=Path, default=None, help="Model JSON (default: seeded demo network)")
    infer.add_argument("--input", type=Path, default=None, help="Input .npy in CHW layout (default: random)")
    infer.add_argument("--seed", type=int, default=0)

    report = sub.add_parser("report", help="Markdown table of a bench CSV next to the reference timings")
    report.add_argument("--csv", type=Path, default=None, help="Bench CSV (default: NIBBLEGEMM_BENCH_CSV)")
    report.add_argument("--output", type=Path, default=None, help="Write the table here instead of stdout")
    return parser


def _bench_config(args: argparse.Namespace, **extra) -> BenchConfig:
    return build_bench_config(
        heights=parse_int_list(args.heights, "heights"),
        widths=parse_int_list(args.widths, "widths"),
        depths=parse_int_list(args.depths, "depths"),
        engines=parse_name_list(args.engines, ENGINE_NAMES, "engines"),
        seed=args.seed,
        **extra,
    )


def _cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    config = _bench_config(
        args,
        target_cv=args.target_cv,
        max_reps=args.max_reps,
        warmup=args.warmup,
        csv_path=args.csv or settings.bench_csv,
        pin_cpu=args.pin_cpu,
    )
    records = run_benchmark(config)
    for (h, w, d), ratio in speedups(records):
        logger.info(f"speedup f32/u4 at {h}x{w}x{d}: {ratio:.2f}x")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    config = _bench_config(args)
    report = verify_engines(config)
    if args.sanity:
        run_sanity(seed=args.seed)
    if not report.passed:
        for failure in report.failures:
            logger.error(
                f"{failure.height}x{failure.width}x{failure.depth} {failure.engine}: "
                f"{failure.report.describe()}"
            )
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _cmd_demo(args: argparse.Namespace, settings: Settings) -> int:
    if args.target_cv <= 0 or args.max_reps < 1 or args.warmup < 0:
        raise NibbleGemmError(
            "Demo timing needs --target-cv > 0, --max-reps >= 1 and --warmup >= 0",
            "Check the demo flags",
            "demo",
        )
    records = run_demo(args.seed, args.target_cv, args.max_reps, args.warmup)
    baseline = records[0].mean_us
    for record in records:
        logger.info(f"{record.setting:>12}: {record.mean_us / 1000:8.3f} ms ({baseline / record.mean_us:.2f}x float)")
    return EXIT_OK


def _cmd_infer(args: argparse.Namespace, settings: Settings) -> int:
    net = load_model(args.model) if args.model else build_demo_network(args.seed)
    net = net.with_settings(workers=settings.workers)
    if args.input is not None:
        try:
            data = np.load(args.input)
        except (OSError, ValueError) as e:
            raise NibbleGemmError(f"Cannot read input {args.input}: {e}", "Pass a CHW .npy array", "input")
    else:
        data = np.random.default_rng(args.seed).uniform(0.0, 1.0, size=net.input_shape)
    output = network_forward(net, Tensor(data))
    top = int(np.argmax(output))
    logger.info(f"Top class {top} (score {output[top]:.4f}) of {output.size} outputs")
    print(top)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace, settings: Settings) -> int:
    path = args.csv or settings.bench_csv
    try:
        records = read_csv(path)
    except (OSError, KeyError, ValueError) as e:
        raise NibbleGemmError(f"Cannot read bench CSV {path}: {e}", "Run `nibblegemm bench --csv PATH` first", "csv")
    table = render_timing_table(records)
    if args.output is not None:
        args.output.write_text(table + "\n", encoding="utf-8")
        logger.info(f"Wrote timing table for {len(records)} records to {args.output}")
    else:
        print(table)
    return EXIT_OK


COMMANDS = {
    "bench": _cmd_bench,
    "verify": _cmd_verify,
    "demo": _cmd_demo,
    "infer": _cmd_infer,
    "report": _cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the `nibblegemm` command."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = Settings.from_env()
    except NibbleGemmError as e:
        configure_logging("INFO")
        logger.error(f"{e.message}. {e.suggestion}")
        return EXIT_USAGE
    configure_logging(settings.log_level)

    try:
        return COMMANDS[args.command](args, settings)
    except NibbleGemmError as e:
        logger.error(e.message)
        if e.suggestion:
            logger.error(f"Suggestion: {e.suggestion}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        raise


if __name__ == "__main__":
    sys.exit(main())
