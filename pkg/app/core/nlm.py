"""
Experimental shiftable non-local means.

A patch of p samples f(x + u_1), ..., f(x + u_p) is compared with a separable
product of per-sample raised-cosine kernels, each fitted to a Gaussian. The
product expands into n^p terms, so the filter is still a ratio of moving sums.
"""
import math
import logging
import itertools
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from models.config import ShiftConfig
from models.image import ImageBuffer
from app.core.expansions import ShiftableExpansion1D, raised_cosine_expansion
from app.core.moving_sum import window_sum_stack

logger = logging.getLogger(__name__)

Offset = Tuple[int, int]

# Candidate patch samples, (row, col) offsets; the first is always the center
_PATCH_LAYOUT: List[Offset] = [(0, 0), (0, 1), (1, 0), (0, -1)]

_GAP_SAMPLES = 4096


@dataclass(frozen=True)
class NlmResult:
    image: ImageBuffer
    kernel_gap: float
    order: int


def patch_offsets(p: int) -> List[Offset]:
    """The first p offsets of a compact patch around the center pixel"""
    if not 1 <= p <= ShiftConfig.MAX_PATCH_SIZE:
        raise ValueError(f"Patch size must be in [1, {ShiftConfig.MAX_PATCH_SIZE}], got {p}")
    return _PATCH_LAYOUT[:p]


def patch_weights(offsets: Sequence[Offset], sigma_patch: float) -> np.ndarray:
    """Gaussian weights of the offsets, normalized to sum to 1"""
    if not sigma_patch > 0:
        raise ValueError(f"sigma_patch must be positive, got {sigma_patch}")
    distances = np.array([dy * dy + dx * dx for dy, dx in offsets], dtype=np.float64)
    weights = np.exp(-distances / (2.0 * sigma_patch ** 2))
    return weights / weights.sum()


def _validate(offsets: Sequence[Offset], h: float, g_weights: Sequence[float], per_dim_order: int) -> None:
    p = len(offsets)
    if not 1 <= p <= ShiftConfig.MAX_PATCH_SIZE:
        raise ValueError(f"Patch size must be in [1, {ShiftConfig.MAX_PATCH_SIZE}], got {p}")
    if tuple(offsets[0]) != (0, 0):
        raise ValueError("The first patch offset must be (0, 0)")
    if isinstance(per_dim_order, bool) or int(per_dim_order) != per_dim_order \
            or not 1 <= per_dim_order <= ShiftConfig.MAX_PER_DIM_ORDER:
        raise ValueError(f"Per-dimension order must be in [1, {ShiftConfig.MAX_PER_DIM_ORDER}], "
                         f"got {per_dim_order!r}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if len(g_weights) != p or any(not g > 0 for g in g_weights):
        raise ValueError("Need one positive patch weight per offset")


def nlm_kernel_expansions(h: float, g_weights: Sequence[float], per_dim_order: int,
                          range_halfwidth: float = ShiftConfig.DEFAULT_RANGE_HALFWIDTH) -> List[ShiftableExpansion1D]:
    """Per-sample raised cosines approximating exp(-g_k t^2 / h^2), each with per_dim_order basis functions"""
    power = per_dim_order - 1
    expansions = []
    for g in g_weights:
        sigma = h / math.sqrt(2.0 * g)
        rate = 1.0 / (sigma * math.sqrt(power)) if power > 0 else 0.0
        expansions.append(raised_cosine_expansion(power, range_halfwidth, rate=rate))
    return expansions


def _patch_images(pixels: np.ndarray, offsets: Sequence[Offset]) -> List[np.ndarray]:
    """P_k(x) = f(x + u_k), taking the nearest edge sample outside the image"""
    height, width = pixels.shape
    images = []
    for dy, dx in offsets:
        rows = np.clip(np.arange(height) + dy, 0, height - 1)
        cols = np.clip(np.arange(width) + dx, 0, width - 1)
        images.append(pixels[np.ix_(rows, cols)])
    return images


def nlm_kernel_gap(expansions: Sequence[ShiftableExpansion1D], h: float, g_weights: Sequence[float],
                   seed: int = ShiftConfig.DEFAULT_BENCH_SEED) -> float:
    """Sup deviation of the product kernel from exp(-sum_k g_k t_k^2 / h^2) on random difference vectors"""
    rng = np.random.default_rng(seed)
    limit = min(e.halfwidth for e in expansions)
    t = rng.uniform(-limit, limit, size=(_GAP_SAMPLES, len(expansions)))
    approximate = np.ones(_GAP_SAMPLES)
    for k, expansion in enumerate(expansions):
        approximate *= expansion.kernel(t[:, k])
    exact = np.exp(-(t ** 2 @ np.asarray(g_weights, dtype=np.float64)) / h ** 2)
    return float(np.max(np.abs(approximate - exact)))


def nlm_shiftable_experimental(f: ImageBuffer, offsets: Sequence[Offset], h: float,
                               g_weights: Sequence[float], T: int, per_dim_order: int,
                               range_halfwidth: float = ShiftConfig.DEFAULT_RANGE_HALFWIDTH,
                               eta_floor: float = ShiftConfig.DEFAULT_ETA_FLOOR,
                               threads: int = 1) -> NlmResult:
    """Non-local means as a ratio of n^p moving sums.

    Args:
        f: input image
        offsets: patch offsets (row, col), the first one (0, 0)
        h: smoothing parameter
        g_weights: one positive weight per offset
        T: search window radius
        per_dim_order: basis functions per patch sample (kernel power n - 1)
        range_halfwidth: intensity half-width of the per-sample kernels
        eta_floor: relative denominator guard
        threads: workers for the moving sums

    Returns:
        NlmResult with the filtered image, the kernel gap and the total order n^p
    """
    _validate(offsets, h, g_weights, per_dim_order)
    span = f.intensity_span()
    if range_halfwidth < span:
        raise ValueError(f"Range half-width {range_halfwidth} is smaller than the intensity span {span}")

    pixels = f.pixels
    expansions = nlm_kernel_expansions(h, g_weights, per_dim_order, range_halfwidth)
    patches = _patch_images(pixels, offsets)
    basis = [e.basis_values(P) for e, P in zip(expansions, patches)]
    coefficients = [e.coefficients(P) for e, P in zip(expansions, patches)]

    coeff_images, denominators = [], []
    for index in itertools.product(*(range(e.order) for e in expansions)):
        c = np.ones_like(pixels)
        H = np.ones_like(pixels)
        for k, n in enumerate(index):
            c = c * coefficients[k][n]
            H = H * basis[k][n]
        coeff_images.append(c)
        denominators.append(H)
    order = len(coeff_images)
    logger.info(f"NLM: p={len(offsets)}, n={per_dim_order}, {order} term(s), T={T}")

    sums = window_sum_stack([pixels * H for H in denominators] + denominators, T, threads)
    numerator = np.zeros_like(pixels)
    denominator = np.zeros_like(pixels)
    magnitude = np.zeros_like(pixels)
    for k, c in enumerate(coeff_images):
        numerator += c * sums[k]
        denominator += c * sums[order + k]
        magnitude += np.abs(c)

    degenerate = np.abs(denominator) < eta_floor * magnitude
    if np.any(degenerate):
        logger.warning(f"NLM denominator guard hit at {int(degenerate.sum())} pixel(s)")
    output = np.where(degenerate, pixels, numerator / np.where(degenerate, 1.0, denominator))

    gap = nlm_kernel_gap(expansions, h, g_weights)
    logger.info(f"NLM kernel gap against the exact exponential weight: {gap:.3e}")
    return NlmResult(ImageBuffer(output), gap, order)


def nlm_direct(f: ImageBuffer, offsets: Sequence[Offset], h: float, g_weights: Sequence[float],
               T: int, per_dim_order: int,
               range_halfwidth: float = ShiftConfig.DEFAULT_RANGE_HALFWIDTH) -> ImageBuffer:
    """Brute-force non-local means with the same separable approximate kernel"""
    _validate(offsets, h, g_weights, per_dim_order)
    pixels = f.pixels
    height, width = pixels.shape
    expansions = nlm_kernel_expansions(h, g_weights, per_dim_order, range_halfwidth)
    patches = _patch_images(pixels, offsets)
    padded_patches = [np.pad(P, T) for P in patches]
    padded = np.pad(pixels, T)
    inside = np.pad(np.ones_like(pixels), T)

    numerator = np.zeros_like(pixels)
    denominator = np.zeros_like(pixels)
    for dy in range(-T, T + 1):
        for dx in range(-T, T + 1):
            window = (slice(T + dy, T + dy + height), slice(T + dx, T + dx + width))
            w = inside[window].copy()
            for expansion, P, padded_P in zip(expansions, patches, padded_patches):
                w *= expansion.kernel(padded_P[window] - P)
            numerator += w * padded[window]
            denominator += w
    degenerate = np.abs(denominator) < ShiftConfig.DEFAULT_ETA_FLOOR
    return ImageBuffer(np.where(degenerate, pixels, numerator / np.where(degenerate, 1.0, denominator)))
