"""
Constant-time certification: time the shiftable bilateral filter across window radii
"""
import time
import logging
import platform
from typing import Callable, List, Optional, Sequence

import numpy as np

from models.config import ShiftConfig
from models.image import ImageBuffer
from models.reports import BenchReport
from app.core.filters import (
    BilateralConfig,
    bilateral_filter_direct,
    bilateral_filter_shiftable,
    max_relative_deviation,
)
from app.core.gaussian_fit import fit_gaussian_raised_cosine
from app.core.kernels import Box

logger = logging.getLogger(__name__)

MAX_SPREAD = 1.3
MIN_DIRECT_GROWTH = 10.0


def synthetic_image(size: int, seed: int = ShiftConfig.DEFAULT_BENCH_SEED) -> ImageBuffer:
    """Reproducible pseudorandom 8-bit image"""
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, size=(size, size)).astype(np.float64))


def median_ms(run: Callable[[], object], runs: int) -> float:
    """Median wall time in milliseconds after one warm-up call"""
    run()
    timings = []
    for _ in range(runs):
        start = time.perf_counter()
        run()
        timings.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(timings))


def run_bench(size: int, T_values: Sequence[int], runs: int, direct: bool = False,
              sigma_r: float = 40.0, threads: int = 1, seed: Optional[int] = None) -> BenchReport:
    """Time the shiftable (and optionally the direct) bilateral filter for every T.

    Args:
        size: side of the square synthetic image
        T_values: window radii to time
        runs: timed runs per radius (median reported)
        direct: also time the brute-force path and compare outputs
        sigma_r: range Gaussian width; the raised-cosine fit uses T_r = 255
        threads: workers for the moving sums
        seed: image seed (defaults to SHIFTKERN_BENCH_SEED)

    Returns:
        BenchReport with the spread and growth criteria evaluated
    """
    if size < 1 or runs < 1 or not T_values:
        raise ValueError("size and runs must be positive and at least one T is required")
    config = ShiftConfig.load_config()
    seed = config["bench_seed"] if seed is None else seed
    image = synthetic_image(size, seed)
    fit = fit_gaussian_raised_cosine(sigma_r, config["range_halfwidth"])
    logger.info(f"Bench: {size}x{size}, T={list(T_values)}, runs={runs}, range N={fit.N}")

    shiftable_ms: List[float] = []
    direct_ms: List[float] = []
    deviation = 0.0
    M = 1
    for T in T_values:
        bilateral = BilateralConfig(Box(T), fit.expansion, T, config["eta_floor"])
        M = bilateral.spatial_expansion.order
        shiftable_ms.append(median_ms(lambda: bilateral_filter_shiftable(image, bilateral, threads), runs))
        logger.info(f"T={T}: shiftable {shiftable_ms[-1]:.1f} ms")
        if direct:
            direct_ms.append(median_ms(lambda: bilateral_filter_direct(image, bilateral), runs))
            deviation = max(deviation, max_relative_deviation(
                bilateral_filter_shiftable(image, bilateral, threads),
                bilateral_filter_direct(image, bilateral),
            ))
            logger.info(f"T={T}: direct {direct_ms[-1]:.1f} ms")

    spread = max(shiftable_ms) / min(shiftable_ms)
    growth = None
    notes = []
    constant_time = spread <= MAX_SPREAD
    if spread > MAX_SPREAD:
        notes.append(f"shiftable spread {spread:.3f} exceeds {MAX_SPREAD}")
    if direct:
        smallest = int(np.argmin(T_values))
        largest = int(np.argmax(T_values))
        growth = direct_ms[largest] / direct_ms[smallest]
        if len(T_values) > 1 and growth < MIN_DIRECT_GROWTH:
            notes.append(f"direct growth {growth:.2f} is below {MIN_DIRECT_GROWTH}")

    return BenchReport(
        width=size,
        height=size,
        T_values=[int(T) for T in T_values],
        runs=runs,
        M=M,
        N=fit.expansion.order,
        shiftable_ms=shiftable_ms,
        direct_ms=direct_ms if direct else None,
        max_relative_deviation=deviation if direct else None,
        shiftable_spread=spread,
        direct_growth=growth,
        constant_time=constant_time,
        machine=f"{platform.machine()} {platform.python_implementation()} {platform.python_version()}",
        notes=notes,
    )
