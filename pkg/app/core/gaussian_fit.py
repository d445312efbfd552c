"""
Fit raised-cosine and polynomial kernels to a target Gaussian exp(-t^2 / 2 sigma^2)
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from models.config import KernelFamily, ShiftConfig
from models.reports import FitReport
from app.core.expansions import (
    ShiftableExpansion1D,
    polynomial_expansion,
    raised_cosine_expansion,
    truncate_expansion,
)
from app.core.kernels import PolyWindow, RaisedCosine

logger = logging.getLogger(__name__)

# Thresholds that land on an integer up to rounding must not jump to the next order
_THRESHOLD_SLACK = 1e-9


class KernelValidityError(ValueError):
    """Requested order is below the threshold that keeps the kernel nonnegative and unimodal"""


@dataclass(frozen=True)
class GaussianFit:
    sigma: float
    T: float
    N: int
    variant: KernelFamily
    expansion: ShiftableExpansion1D
    sup_error: float
    warning: Optional[str] = None

    @property
    def spec(self) -> Union[RaisedCosine, PolyWindow]:
        """The fitted kernel as a scaled 1-D spec"""
        if self.variant is KernelFamily.COSINE:
            return RaisedCosine(self.N, self.T, 2.0 * self.T / (math.pi * self.sigma * math.sqrt(self.N)))
        return PolyWindow(self.N, self.T, self.T / (self.sigma * math.sqrt(2.0 * self.N)))

    def kernel(self, t) -> np.ndarray:
        return self.expansion.kernel(t)

    def to_report(self) -> FitReport:
        return FitReport(
            sigma=self.sigma,
            T=self.T,
            N=self.N,
            variant=self.variant.value,
            sup_error=self.sup_error,
            truncated_terms=self.expansion.truncated_terms,
            warning=self.warning,
        )


def raised_cosine_threshold(sigma: float, T: float) -> int:
    """Smallest N keeping T / (sigma sqrt N) <= pi / 2"""
    return max(1, math.ceil((2.0 * T / (math.pi * sigma)) ** 2 - _THRESHOLD_SLACK))


def polynomial_threshold(sigma: float, T: float) -> int:
    """Smallest N keeping 1 - T^2 / (2 N sigma^2) >= 0"""
    return max(1, math.ceil(T ** 2 / (2.0 * sigma ** 2) - _THRESHOLD_SLACK))


def gaussian(sigma: float) -> Callable:
    return lambda t: np.exp(-np.asarray(t, dtype=np.float64) ** 2 / (2.0 * sigma ** 2))


def sup_error(kernel: Callable, sigma: float, T: float) -> float:
    grid = np.linspace(-T, T, ShiftConfig.GRID_POINTS_1D)
    return float(np.max(np.abs(kernel(grid) - gaussian(sigma)(grid))))


def kernel_variance(kernel: Callable, T: float) -> float:
    """Second moment of the kernel normalized to unit mass on [-T, T]"""
    grid = np.linspace(-T, T, ShiftConfig.GRID_POINTS_1D)
    values = np.asarray(kernel(grid), dtype=np.float64)
    mass = np.trapezoid(values, grid)
    return float(np.trapezoid(grid ** 2 * values, grid) / mass)


def _check_arguments(sigma: float, T: float, epsilon: float) -> None:
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"T must be positive, got {T}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")


def _choose_order(threshold: int, order: Optional[int], force: bool, label: str) -> int:
    if order is None:
        return threshold
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise ValueError(f"Forced order must be a positive integer, got {order!r}")
    if order < threshold and not force:
        raise KernelValidityError(
            f"{label} order N={order} is below the validity threshold N={threshold}"
        )
    return int(order)


def _finish(sigma: float, T: float, N: int, variant: KernelFamily,
            expansion: ShiftableExpansion1D, epsilon: float,
            order_cap: Optional[int]) -> GaussianFit:
    expansion = truncate_expansion(expansion, epsilon)
    cap = ShiftConfig.load_config()["order_cap"] if order_cap is None else order_cap
    warning = None
    if N > cap:
        warning = f"order N={N} exceeds the configured cap {cap}"
        logger.warning(f"Gaussian fit (sigma={sigma}, T={T}): {warning}")
    error = sup_error(expansion.kernel, sigma, T)
    logger.debug(f"Fitted {variant.value} kernel: sigma={sigma}, T={T}, N={N}, sup_error={error:.3e}")
    return GaussianFit(sigma, T, N, variant, expansion, error, warning)


def fit_gaussian_raised_cosine(sigma: float, T: float, epsilon: float = 0.0,
                               order: Optional[int] = None, force: bool = False,
                               order_cap: Optional[int] = None) -> GaussianFit:
    """Fit [cos(t / (sigma sqrt N))]^N to the Gaussian of width sigma on [-T, T].

    Args:
        sigma: target standard deviation
        T: half-width of the kernel domain
        epsilon: truncation tolerance passed to truncate_expansion
        order: use this N instead of the smallest valid one
        force: accept an order below the validity threshold
        order_cap: warning threshold for N (defaults to SHIFTKERN_ORDER_CAP)

    Returns:
        GaussianFit with the (possibly truncated) expansion and its sup-norm error
    """
    _check_arguments(sigma, T, epsilon)
    N = _choose_order(raised_cosine_threshold(sigma, T), order, force, "Raised-cosine")
    expansion = raised_cosine_expansion(N, T, rate=1.0 / (sigma * math.sqrt(N)))
    return _finish(sigma, T, N, KernelFamily.COSINE, expansion, epsilon, order_cap)


def fit_gaussian_polynomial(sigma: float, T: float, epsilon: float = 0.0,
                            order: Optional[int] = None, force: bool = False,
                            order_cap: Optional[int] = None) -> GaussianFit:
    """Fit (1 - t^2 / (2 N sigma^2))^N to the Gaussian of width sigma on [-T, T]"""
    _check_arguments(sigma, T, epsilon)
    N = _choose_order(polynomial_threshold(sigma, T), order, force, "Polynomial")
    expansion = polynomial_expansion(N, T, rate=T ** 2 / (2.0 * N * sigma ** 2))
    return _finish(sigma, T, N, KernelFamily.POLY, expansion, epsilon, order_cap)
