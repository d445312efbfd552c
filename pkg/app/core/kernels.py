"""
Kernel specifications, closed-form evaluation and 2-D quality metrics
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from models.config import KernelFamily, ShiftConfig
from app.core.expansions import (
    DirectionalExpansion2D,
    SeparableExpansion2D,
    ShiftableExpansion1D,
    ShiftableExpansion2D,
    box_expansion,
    polynomial_expansion,
    raised_cosine_expansion,
)

logger = logging.getLogger(__name__)

# Plane-wave count doubles with every direction
MAX_EXPANDED_DIRECTIONS = 12


@dataclass(frozen=True)
class RaisedCosine:
    """[cos(pi * scale * t / 2T)]^N on [-T, T]"""
    N: int
    T: float
    scale: float = 1.0

    @property
    def rate(self) -> float:
        return math.pi * self.scale / (2.0 * self.T)


@dataclass(frozen=True)
class PolyWindow:
    """(1 - (scale * t / T)^2)^N on [-T, T]"""
    N: int
    T: float
    scale: float = 1.0


@dataclass(frozen=True)
class Separable2D:
    kx: Union[RaisedCosine, PolyWindow]
    ky: Union[RaisedCosine, PolyWindow]

    @property
    def T(self) -> float:
        return max(self.kx.T, self.ky.T)


@dataclass(frozen=True)
class Directional2D:
    """Product of N rotated 1-D windows with directions theta_k = (k-1) pi / N"""
    N: int
    T: float
    scale: float
    family: KernelFamily = KernelFamily.COSINE


@dataclass(frozen=True)
class Box:
    """Constant kernel on [-T, T]^2"""
    T: float


KernelSpec = Union[RaisedCosine, PolyWindow, Separable2D, Directional2D, Box]


def is_two_dimensional(spec: KernelSpec) -> bool:
    return isinstance(spec, (Separable2D, Directional2D, Box))


def _validate(spec: KernelSpec) -> None:
    if isinstance(spec, Separable2D):
        _validate(spec.kx)
        _validate(spec.ky)
        return
    if isinstance(spec, Box):
        if not (spec.T >= 0 and math.isfinite(spec.T)):
            raise ValueError(f"Box radius must be non-negative, got {spec.T}")
        return
    if not (spec.T > 0 and math.isfinite(spec.T)):
        raise ValueError(f"Half-width T must be positive, got {spec.T}")
    if isinstance(spec.N, bool) or int(spec.N) != spec.N or spec.N < 0:
        raise ValueError(f"Kernel order must be a non-negative integer, got {spec.N!r}")
    if isinstance(spec, Directional2D) and spec.N < 1:
        raise ValueError("Directional kernels need N >= 1")


def _evaluate_1d(spec: Union[RaisedCosine, PolyWindow], t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(np.abs(t) > spec.T):
        raise ValueError(f"Point outside [-{spec.T}, {spec.T}]")
    if isinstance(spec, RaisedCosine):
        return np.cos(spec.rate * t) ** spec.N
    return (1.0 - (spec.scale * t / spec.T) ** 2) ** spec.N


def _directional_value(spec: Directional2D, x1, x2) -> np.ndarray:
    value = np.ones(np.broadcast(x1, x2).shape)
    for k in range(spec.N):
        theta = k * math.pi / spec.N
        u = spec.scale * (x1 * math.cos(theta) + x2 * math.sin(theta))
        # natural extension beyond |u| <= T, no clamping
        if spec.family is KernelFamily.POLY:
            value = value * (1.0 - (u / spec.T) ** 2)
        else:
            value = value * np.cos(math.pi * u / (2.0 * spec.T))
    return value


def evaluate_kernel(spec: KernelSpec, point) -> np.ndarray:
    """Closed-form kernel value.

    1-D variants take t (scalar or array) with |t| <= T. 2-D variants take
    (x1, x2) inside [-T, T]^2.
    """
    _validate(spec)
    if not is_two_dimensional(spec):
        return _evaluate_1d(spec, point)

    x1, x2 = (np.asarray(c, dtype=np.float64) for c in point)
    if np.any(np.abs(x1) > spec.T) or np.any(np.abs(x2) > spec.T):
        raise ValueError(f"Point outside [-{spec.T}, {spec.T}]^2")
    if isinstance(spec, Box):
        return np.ones(np.broadcast(x1, x2).shape)
    if isinstance(spec, Separable2D):
        return _evaluate_1d(spec.kx, x1) * _evaluate_1d(spec.ky, x2)
    return _directional_value(spec, x1, x2)


def directional_kernel(N: int, T: float, scale: Optional[float] = None) -> Directional2D:
    """Rotated raised-cosine product; the default per-direction scale is sqrt(6/N)"""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"Directional kernels need an integer N >= 1, got {N!r}")
    spec = Directional2D(int(N), float(T), math.sqrt(6.0 / N) if scale is None else float(scale))
    _validate(spec)
    return spec


def four_direction_kernel(T: float, family: KernelFamily = KernelFamily.COSINE) -> Directional2D:
    """phi(x1)phi((x1+x2)/sqrt2)phi(x2)phi((x1-x2)/sqrt2) with unit-order 1-D windows"""
    if family not in (KernelFamily.COSINE, KernelFamily.POLY):
        raise ValueError(f"Four-direction kernels come in cosine or poly form, got {family}")
    spec = Directional2D(4, float(T), 1.0, family)
    _validate(spec)
    return spec


def directional_limit_gaussian(spec: Directional2D) -> Callable:
    """Gaussian the raised-cosine product approaches as N grows at fixed scale^2 * N"""
    if spec.family is not KernelFamily.COSINE or spec.N < 2:
        raise ValueError("Only cosine products with N >= 2 have an isotropic Gaussian limit")
    exponent = (math.pi * spec.scale) ** 2 * spec.N / (16.0 * spec.T ** 2)

    def gaussian(x1, x2):
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        return np.exp(-exponent * (x1 ** 2 + x2 ** 2))

    return gaussian


def _as_function(kernel, halfwidth: Optional[float]) -> Tuple[Callable, float]:
    if callable(kernel) and not is_two_dimensional(kernel):
        if halfwidth is None:
            raise ValueError("A half-width is required for kernel functions")
        return kernel, float(halfwidth)
    if not is_two_dimensional(kernel):
        raise ValueError(f"Expected a 2-D kernel, got {type(kernel).__name__}")
    return (lambda x1, x2: evaluate_kernel(kernel, (x1, x2))), float(kernel.T)


def isotropy_metric(kernel, halfwidth: Optional[float] = None) -> float:
    """Worst spread of kernel values around circles of radius 0.1T..0.9T, relative to the peak"""
    function, T = _as_function(kernel, halfwidth)
    peak = float(function(np.float64(0.0), np.float64(0.0)))
    angles = np.linspace(0.0, 2.0 * math.pi, 360, endpoint=False)
    spread = 0.0
    for i in range(1, 10):
        radius = 0.1 * i * T
        values = function(radius * np.cos(angles), radius * np.sin(angles))
        spread = max(spread, float(values.max() - values.min()))
    return spread / peak


def corner_overshoot(kernel, halfwidth: Optional[float] = None) -> float:
    """Minimum over the [-T, T]^2 grid divided by the peak; negative when the kernel dips below zero"""
    function, T = _as_function(kernel, halfwidth)
    axis = np.linspace(-T, T, ShiftConfig.GRID_POINTS_2D)
    x1, x2 = np.meshgrid(axis, axis, indexing="xy")
    values = function(x1, x2)
    peak = float(function(np.float64(0.0), np.float64(0.0)))
    return float(values.min()) / peak


def sup_distance(kernel, target: Callable, halfwidth: Optional[float] = None) -> float:
    """Sup-norm distance between a 2-D kernel and a target function on the 257x257 grid"""
    function, T = _as_function(kernel, halfwidth)
    axis = np.linspace(-T, T, ShiftConfig.GRID_POINTS_2D)
    x1, x2 = np.meshgrid(axis, axis, indexing="xy")
    return float(np.max(np.abs(function(x1, x2) - target(x1, x2))))


@dataclass(frozen=True)
class KernelValidity:
    symmetric: bool
    nonnegative: bool
    unimodal: bool

    @property
    def valid(self) -> bool:
        return self.symmetric and self.nonnegative and self.unimodal


def kernel_validity(kernel: Callable, T: float, tolerance: float = 1e-12) -> KernelValidity:
    """Grid check (1001 points) of symmetry, nonnegativity and monotone decay for t >= 0"""
    grid = np.linspace(-T, T, ShiftConfig.GRID_POINTS_1D)
    values = np.asarray(kernel(grid), dtype=np.float64)
    right = values[grid >= 0]
    return KernelValidity(
        symmetric=bool(np.max(np.abs(values - values[::-1])) <= tolerance),
        nonnegative=bool(values.min() >= -tolerance),
        unimodal=bool(np.all(np.diff(right) <= tolerance)),
    )


def expansion_for_1d(spec: Union[RaisedCosine, PolyWindow]) -> ShiftableExpansion1D:
    _validate(spec)
    if isinstance(spec, RaisedCosine):
        return raised_cosine_expansion(spec.N, spec.T, rate=spec.rate)
    return polynomial_expansion(spec.N, spec.T, rate=spec.scale ** 2)


def expansion_for_spec(spec: KernelSpec):
    """Shiftable expansion of a kernel spec (1-D expansion for 1-D variants)"""
    _validate(spec)
    if not is_two_dimensional(spec):
        return expansion_for_1d(spec)
    if isinstance(spec, Box):
        return box_expansion(spec.T)
    if isinstance(spec, Separable2D):
        return SeparableExpansion2D(expansion_for_1d(spec.kx), expansion_for_1d(spec.ky))
    if spec.family is not KernelFamily.COSINE:
        raise ValueError("Polynomial directional kernels have no plane-wave expansion; "
                         "use a separable polynomial kernel instead")
    if spec.N > MAX_EXPANDED_DIRECTIONS:
        raise ValueError(f"Directional expansions are limited to {MAX_EXPANDED_DIRECTIONS} directions, "
                         f"got {spec.N}")
    expansion = DirectionalExpansion2D(spec.N, spec.T, spec.scale)
    logger.debug(f"Directional expansion: {spec.N} directions, {expansion.order} basis functions")
    return expansion


def as_expansion_2d(kernel) -> ShiftableExpansion2D:
    """Accept either a 2-D KernelSpec or an already built 2-D expansion"""
    if isinstance(kernel, (SeparableExpansion2D, DirectionalExpansion2D)):
        return kernel
    if not is_two_dimensional(kernel):
        raise ValueError(f"Expected a 2-D kernel, got {type(kernel).__name__}")
    return expansion_for_spec(kernel)
