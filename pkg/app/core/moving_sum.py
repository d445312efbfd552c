"""
Box sums over [-T, T]^2 windows in constant time per pixel
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

import numpy as np

from models.image import ImageBuffer

logger = logging.getLogger(__name__)


def _check_radius(T) -> int:
    if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 0:
        raise ValueError(f"Window radius must be a non-negative integer, got {T!r}")
    return int(T)


def _running_window_sum(values: np.ndarray, T: int, axis: int) -> np.ndarray:
    """Sliding sum along one axis with windows clipped at the borders.

    Each line gets its own running sum, so the accumulated magnitude never
    exceeds one row or column.
    """
    n = values.shape[axis]
    prefix = np.cumsum(values, axis=axis)
    index = np.arange(n)
    upper = np.take(prefix, np.minimum(index + T, n - 1), axis=axis)
    lower = np.take(prefix, np.maximum(index - T - 1, 0), axis=axis)

    shape = [1] * values.ndim
    shape[axis] = n
    inside = (index - T - 1 >= 0).reshape(shape)
    return upper - np.where(inside, lower, 0.0)


def window_sum(values: np.ndarray, T: int) -> np.ndarray:
    """Array form of moving_sum: horizontal pass, then vertical pass"""
    T = _check_radius(T)
    values = np.asarray(values, dtype=np.float64)
    if T == 0:
        return values.copy()
    return _running_window_sum(_running_window_sum(values, T, axis=1), T, axis=0)


def moving_sum(F: ImageBuffer, T: int) -> ImageBuffer:
    """Sum of F over the clipped window [-T, T]^2 around every pixel"""
    return ImageBuffer(window_sum(F.pixels, T))


def window_sum_stack(stack: Sequence[np.ndarray], T: int, threads: int = 1) -> List[np.ndarray]:
    """window_sum over independent images; output order follows input order"""
    T = _check_radius(T)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if len(stack) == 0:
        return []
    if threads == 1 or len(stack) == 1:
        return [window_sum(image, T) for image in stack]

    workers = min(threads, len(stack))
    logger.debug(f"Moving sums of {len(stack)} images on {workers} threads (T={T})")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda image: window_sum(image, T), stack))


def moving_sum_stack(stack: Sequence[ImageBuffer], T: int, threads: int = 1) -> List[ImageBuffer]:
    sums = window_sum_stack([image.pixels for image in stack], T, threads)
    return [ImageBuffer(s) for s in sums]
