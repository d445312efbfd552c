from enum import Enum
from dataclasses import dataclass

import numpy as np


class BoundaryPolicy(Enum):
    # Windows are clipped at the borders; samples outside contribute 0.
    ZERO_OUTSIDE = "zero_outside"


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """W x H grid of doubles, stored row-major (pixels[row, col])"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.float64, order="C", copy=True)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError(f"ImageBuffer needs a non-empty 2-D array, got shape {pixels.shape}")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> "ImageBuffer":
        """Build from a flat row-major sample sequence, rejecting NaN/Inf"""
        data = np.asarray(samples, dtype=np.float64)
        if data.size != width * height:
            raise ValueError(f"Expected {width * height} samples, got {data.size}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Image samples must be finite")
        return cls(data.reshape(height, width))

    @classmethod
    def filled(cls, width: int, height: int, value: float = 0.0) -> "ImageBuffer":
        return cls(np.full((height, width), float(value)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view: (row, col) -> data[row * width + col]"""
        return self.pixels.reshape(-1)

    def at(self, row: int, col: int) -> float:
        return float(self.data[row * self.width + col])

    def intensity_span(self) -> float:
        return float(self.pixels.max() - self.pixels.min())
