"""
Spatial and bilateral filters: brute-force references and constant-time shiftable paths
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, Tuple

import numpy as np

from models.config import KernelFamily, ShiftConfig
from models.image import ImageBuffer
from app.core.expansions import ShiftableExpansion1D, ShiftableExpansion2D
from app.core.gaussian_fit import KernelValidityError
from app.core.kernels import KernelSpec, as_expansion_2d, corner_overshoot, evaluate_kernel, is_two_dimensional
from app.core.moving_sum import window_sum_stack

logger = logging.getLogger(__name__)


_EPS = float(np.finfo(np.float64).eps)


class RangeSpanError(ValueError):
    """Range expansion does not cover the intensity differences of the input"""


class KernelConditioningError(KernelValidityError):
    """Basis terms grow too large for the shifted sum to stay accurate in float64"""


def _check_radius(T) -> int:
    if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 0:
        raise ValueError(f"Window radius must be a non-negative integer, got {T!r}")
    return int(T)


@dataclass(frozen=True)
class BilateralConfig:
    spatial: KernelSpec
    range: ShiftableExpansion1D
    window_radius: int
    eta_floor: float = ShiftConfig.DEFAULT_ETA_FLOOR

    def __post_init__(self):
        _check_radius(self.window_radius)
        if not is_two_dimensional(self.spatial):
            raise ValueError("The spatial kernel of a bilateral filter must be 2-D")
        if self.spatial.T != self.window_radius:
            raise ValueError(
                f"Window radius {self.window_radius} does not match the spatial kernel support T={self.spatial.T}"
            )
        if not self.eta_floor > 0:
            raise ValueError(f"eta_floor must be positive, got {self.eta_floor}")

    @cached_property
    def spatial_expansion(self) -> ShiftableExpansion2D:
        return as_expansion_2d(self.spatial)


@dataclass
class BasisImageStack:
    """Per-pair images of the bilateral decomposition, ordered m outer, n inner"""
    coeff_images: List[np.ndarray]
    numerator_images: List[np.ndarray]
    denominator_images: List[np.ndarray]
    M: int
    N: int

    def __post_init__(self):
        size = self.M * self.N
        if not (len(self.coeff_images) == len(self.numerator_images) == len(self.denominator_images) == size):
            raise ValueError(f"Stack lists must all hold M*N = {size} images")


def _ratio(numerator: np.ndarray, denominator: np.ndarray, fallback: np.ndarray,
           floor: np.ndarray) -> np.ndarray:
    """numerator / denominator, with the center pixel wherever |denominator| < floor"""
    degenerate = np.abs(denominator) < floor
    if np.any(degenerate):
        logger.warning(f"Denominator guard hit at {int(degenerate.sum())} pixel(s); keeping the input value")
    safe = np.where(degenerate, 1.0, denominator)
    return np.where(degenerate, fallback, numerator / safe)


def _tile_size(expansion: ShiftableExpansion2D, T: int, range_bound: float, height: int, width: int) -> int:
    """Largest square tile on which the recentred expansion keeps its rounding below ROUNDING_LIMIT"""
    size = max(height, width)
    while True:
        half = size / 2.0
        growth = expansion.magnitude_bound(half + T, half) * range_bound
        if growth * _EPS <= ShiftConfig.ROUNDING_LIMIT:
            return size
        if size == 1 or not expansion.is_polynomial:
            raise KernelConditioningError(
                f"Expansion is too poorly conditioned for a shiftable filter "
                f"(term growth {growth:.3e} on {size}x{size} tiles, T={T})"
            )
        size = (size + 1) // 2


def _tiled(pixels: np.ndarray, T: int, expansion: ShiftableExpansion2D, range_bound: float,
           filter_region: Callable[[np.ndarray, Tuple[float, float]], np.ndarray]) -> np.ndarray:
    """Filter tile by tile, each on its window-padded region with the basis centred on the tile.

    Window sums are exact for every pixel of a tile because its region
    extends T pixels past it (or to the image border).
    """
    height, width = pixels.shape
    size = _tile_size(expansion, T, range_bound, height, width)
    if not expansion.is_polynomial:
        return filter_region(pixels, (0.0, 0.0))

    logger.info(f"Polynomial spatial basis: filtering {size}x{size} tiles")
    output = np.empty_like(pixels)
    for top in range(0, height, size):
        for left in range(0, width, size):
            bottom, right = min(top + size, height), min(left + size, width)
            r0, c0 = max(top - T, 0), max(left - T, 0)
            r1, c1 = min(bottom + T, height), min(right + T, width)
            origin = ((top + bottom - 1) / 2.0 - r0, (left + right - 1) / 2.0 - c0)
            region = filter_region(pixels[r0:r1, c0:c1], origin)
            output[top:bottom, left:right] = region[top - r0:bottom - r0, left - c0:right - c0]
    return output


def _offsets(T: int):
    for dy in range(-T, T + 1):
        for dx in range(-T, T + 1):
            yield dy, dx


def _neighbours(padded: np.ndarray, T: int, dy: int, dx: int, height: int, width: int) -> np.ndarray:
    """Values at x + (dy, dx) for every pixel x of the unpadded image"""
    return padded[T + dy:T + dy + height, T + dx:T + dx + width]


def _spatial_weight_function(kernel) -> Callable:
    if is_two_dimensional(kernel):
        return lambda x1, x2: evaluate_kernel(kernel, (x1, x2))
    return as_expansion_2d(kernel).kernel


def spatial_filter_direct(f: ImageBuffer, kernel, T: int) -> ImageBuffer:
    """Brute-force normalized spatial filter with clipped windows"""
    T = _check_radius(T)
    if is_two_dimensional(kernel):
        overshoot = corner_overshoot(kernel)
        if overshoot < 0:
            logger.warning(f"Spatial kernel dips below zero (min/peak = {overshoot:.4f}); filtering anyway")
    weight = _spatial_weight_function(kernel)

    pixels = f.pixels
    height, width = pixels.shape
    padded = np.pad(pixels, T)
    inside = np.pad(np.ones_like(pixels), T)
    numerator = np.zeros_like(pixels)
    denominator = np.zeros_like(pixels)
    for dy, dx in _offsets(T):
        w = float(weight(dx, dy))
        numerator += w * _neighbours(padded, T, dy, dx, height, width)
        denominator += w * _neighbours(inside, T, dy, dx, height, width)
    return ImageBuffer(_ratio(numerator, denominator, pixels, ShiftConfig.DEFAULT_ETA_FLOOR))


def spatial_filter_shiftable(f: ImageBuffer, kernel, T: int, eta_floor: float = ShiftConfig.DEFAULT_ETA_FLOOR,
                             threads: int = 1) -> ImageBuffer:
    """Constant-time spatial filter.

    Args:
        f: input image
        kernel: 2-D KernelSpec or a separable/directional 2-D expansion
        T: window radius in pixels
        eta_floor: relative denominator guard
        threads: workers for the moving sums

    Returns:
        Filtered image; pixels with a vanishing denominator keep their input value

    Raises:
        KernelConditioningError: a polynomial kernel stays poorly conditioned even on single-pixel tiles
    """
    T = _check_radius(T)
    expansion = as_expansion_2d(kernel)
    height, width = f.pixels.shape
    logger.info(f"Spatial filter: {expansion.order} basis image(s), T={T}, {width}x{height}")

    def filter_region(pixels: np.ndarray, origin: Tuple[float, float]) -> np.ndarray:
        rows, cols = pixels.shape
        basis = expansion.basis_images(rows, cols, origin)
        coefficients = expansion.coefficient_images(rows, cols, origin)
        sums = window_sum_stack([pixels * phi for phi in basis] + basis, T, threads)
        numerator = np.zeros_like(pixels)
        denominator = np.zeros_like(pixels)
        magnitude = np.zeros_like(pixels)
        for n, c in enumerate(coefficients):
            numerator += c * sums[n]
            denominator += c * sums[len(basis) + n]
            magnitude += np.abs(c)
        return _ratio(numerator, denominator, pixels, eta_floor * magnitude)

    return ImageBuffer(_tiled(f.pixels, T, expansion, 1.0, filter_region))


def bilateral_filter_direct(f: ImageBuffer, config: BilateralConfig) -> ImageBuffer:
    """Brute-force bilateral filter: weights phi(y) * psi(f(x - y) - f(x)) over clipped windows"""
    T = config.window_radius
    spatial = config.spatial_expansion.kernel
    range_kernel = config.range.kernel

    pixels = f.pixels
    height, width = pixels.shape
    padded = np.pad(pixels, T)
    inside = np.pad(np.ones_like(pixels), T)
    numerator = np.zeros_like(pixels)
    denominator = np.zeros_like(pixels)
    for dy, dx in _offsets(T):
        neighbour = _neighbours(padded, T, dy, dx, height, width)
        mask = _neighbours(inside, T, dy, dx, height, width)
        w = float(spatial(dx, dy)) * range_kernel(neighbour - pixels) * mask
        numerator += w * neighbour
        denominator += w
    return ImageBuffer(_ratio(numerator, denominator, pixels, config.eta_floor))


def build_basis_stack(f: ImageBuffer, config: BilateralConfig, origin: Tuple[float, float] = (0.0, 0.0),
                      range_origin: float = 0.0) -> BasisImageStack:
    """Coefficient, numerator and denominator images for every (spatial m, range n) pair.

    `origin` is the pixel (row, col) the spatial basis is centred on and
    `range_origin` the intensity the range basis is centred on.
    """
    pixels = f.pixels
    height, width = pixels.shape
    spatial = config.spatial_expansion
    phi = spatial.basis_images(height, width, origin)
    c = spatial.coefficient_images(height, width, origin)
    psi = config.range.basis_values(pixels, range_origin)
    d = config.range.coefficients(pixels, range_origin)

    coeff_images, numerator_images, denominator_images = [], [], []
    for m in range(len(phi)):
        for n in range(len(psi)):
            h = phi[m] * psi[n]
            coeff_images.append(c[m] * d[n])
            numerator_images.append(h * pixels)
            denominator_images.append(h)
    return BasisImageStack(coeff_images, numerator_images, denominator_images, len(phi), len(psi))


def bilateral_filter_shiftable(f: ImageBuffer, config: BilateralConfig, threads: int = 1) -> ImageBuffer:
    """Constant-time bilateral filter; cost per pixel grows with M*N, not with the window radius"""
    span = f.intensity_span()
    if config.range.halfwidth < span:
        raise RangeSpanError(
            f"Range kernel half-width {config.range.halfwidth} is smaller than the intensity span {span}"
        )

    spatial = config.spatial_expansion
    T = config.window_radius
    logger.info(f"Bilateral filter: M={spatial.order}, N={config.range.order}, "
                f"{spatial.order * config.range.order} basis pair(s), T={T}")

    # monomials of the range variable stay small around the mid intensity
    range_origin = 0.0
    range_bound = config.range.magnitude_bound(0.0, 0.0)
    if config.range.family is KernelFamily.POLY:
        range_origin = (float(f.pixels.min()) + float(f.pixels.max())) / 2.0
        range_bound = config.range.magnitude_bound(span / 2.0, span / 2.0)

    def filter_region(pixels: np.ndarray, origin: Tuple[float, float]) -> np.ndarray:
        stack = build_basis_stack(ImageBuffer(pixels), config, origin, range_origin)
        sums = window_sum_stack(stack.numerator_images + stack.denominator_images, T, threads)
        size = stack.M * stack.N
        numerator = np.zeros_like(pixels)
        denominator = np.zeros_like(pixels)
        magnitude = np.zeros_like(pixels)
        for k, a in enumerate(stack.coeff_images):
            numerator += a * sums[k]
            denominator += a * sums[size + k]
            magnitude += np.abs(a)
        return _ratio(numerator, denominator, pixels, config.eta_floor * magnitude)

    return ImageBuffer(_tiled(f.pixels, T, spatial, range_bound, filter_region))


def max_relative_deviation(a: ImageBuffer, b: ImageBuffer) -> float:
    """max |a - b| / max(|b|, 1) over all pixels (b is the reference)"""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"Shape mismatch: {a.pixels.shape} vs {b.pixels.shape}")
    return float(np.max(np.abs(a.pixels - b.pixels) / np.maximum(np.abs(b.pixels), 1.0)))

