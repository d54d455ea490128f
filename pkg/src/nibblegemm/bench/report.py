"""
Timing Report

Renders benchmark records as a markdown table next to published reference
timings of the same grid, measured on an ODROID-XU4 (Exynos 5422) with
hand-written NEON kernels.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from .engines import ENGINE_NAMES
from .harness import BenchRecord

logger = logging.getLogger(__name__)

GridPoint = Tuple[int, int, int]

# (height, width, depth) -> mean microseconds for f32, i32, u8, u4
REFERENCE_US: Dict[GridPoint, Tuple[float, float, float, float]] = {
    (8, 100, 10): (8.3, 8.3, 4.6, 3.9),
    (8, 100, 40): (21.0, 21.0, 12.0, 8.4),
    (8, 100, 100): (53.0, 52.0, 28.0, 19.0),
    (8, 400, 10): (32.0, 33.0, 17.0, 14.0),
    (8, 400, 40): (90.0, 90.0, 50.0, 33.0),
    (8, 400, 100): (210.0, 210.0, 150.0, 110.0),
    (8, 1600, 10): (130.0, 140.0, 70.0, 58.0),
    (8, 1600, 40): (350.0, 360.0, 250.0, 190.0),
    (8, 1600, 100): (2200.0, 2400.0, 780.0, 550.0),
    (24, 100, 10): (15.0, 15.0, 9.1, 6.2),
    (24, 100, 40): (44.0, 43.0, 24.0, 15.0),
    (24, 100, 100): (110.0, 100.0, 54.0, 32.0),
    (24, 400, 10): (62.0, 61.0, 35.0, 24.0),
    (24, 400, 40): (180.0, 170.0, 96.0, 58.0),
    (24, 400, 100): (440.0, 420.0, 240.0, 150.0),
    (24, 1600, 10): (240.0, 240.0, 140.0, 97.0),
    (24, 1600, 40): (720.0, 710.0, 430.0, 280.0),
    (24, 1600, 100): (3200.0, 3100.0, 1200.0, 760.0),
}


def format_time(us: Optional[float]) -> str:
    """Microseconds below 1 ms, milliseconds above; blank when missing."""
    if us is None:
        return ""
    if us < 1000.0:
        return f"{us:.3g} us"
    return f"{us / 1000.0:.3g} ms"


def _ratio(base: Optional[float], other: Optional[float]) -> str:
    if not base or not other:
        return ""
    return f"{base / other:.2f}x"


def render_timing_table(records: Sequence[BenchRecord]) -> str:
    """
    Markdown table of reference and local timings per grid point.

    Rows cover the reference grid plus any extra points in `records`.
    Each side gets its f32/u4 speedup column; cells without data stay blank.
    """
    local: Dict[Tuple[int, int, int, str], float] = {
        (r.height, r.width, r.depth, r.engine): r.mean_us for r in records
    }
    points = sorted(set(REFERENCE_US) | {(r.height, r.width, r.depth) for r in records})

    header = ["Height", "Width", "Depth"]
    header += [f"Ref {name.upper()}" for name in ENGINE_NAMES] + ["Ref F32/U4"]
    header += [f"Local {name.upper()}" for name in ENGINE_NAMES] + ["Local F32/U4"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]

    for point in points:
        reference = REFERENCE_US.get(point)
        ref_times: List[Optional[float]] = list(reference) if reference else [None] * len(ENGINE_NAMES)
        local_times = [local.get((*point, name)) for name in ENGINE_NAMES]
        cells = [str(v) for v in point]
        cells += [format_time(t) for t in ref_times] + [_ratio(ref_times[0], ref_times[-1])]
        cells += [format_time(t) for t in local_times] + [_ratio(local_times[0], local_times[-1])]
        lines.append("| " + " | ".join(cells) + " |")

    logger.debug(f"Rendered timing table with {len(points)} rows from {len(records)} records")
    return "\n".join(lines)
