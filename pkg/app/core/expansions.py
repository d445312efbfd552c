"""
Shiftable expansions: phi(t - tau) = sum_n c_n(tau) * phi_n(t)

Raised-cosine kernels expand into real cosine/sine pairs, polynomial windows
into monomials of t/T. The 2-D expansions (separable tensor products and
directional plane waves) feed the constant-time filters.
"""
import math
import logging
import itertools
from enum import Enum
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple, Union

import numpy as np

from models.config import KernelFamily, ShiftConfig

logger = logging.getLogger(__name__)


class BasisKind(Enum):
    COSINE = "cosine"
    SINE = "sine"
    MONOMIAL = "monomial"


@dataclass(frozen=True)
class BasisFunction1D:
    kind: BasisKind
    frequency: float = 0.0
    degree: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind is BasisKind.MONOMIAL:
            if self.degree < 0:
                raise ValueError(f"Monomial degree must be non-negative, got {self.degree}")
        elif not math.isfinite(self.frequency):
            raise ValueError(f"Basis frequency must be finite, got {self.frequency}")

    @property
    def parameter(self) -> float:
        """Frequency for trigonometric terms, degree for monomials"""
        return float(self.degree) if self.kind is BasisKind.MONOMIAL else self.frequency

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind is BasisKind.COSINE:
            return np.cos(self.frequency * t)
        if self.kind is BasisKind.SINE:
            return np.sin(self.frequency * t)
        return (t / self.scale) ** self.degree


@dataclass(frozen=True)
class KernelComponent:
    # cosine family: weight * cos(index * rate * u)
    # polynomial family: weight * (u / T) ** (2 * index)
    index: int
    weight: float


def _check_order(N) -> int:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 0:
        raise ValueError(f"Kernel order must be a non-negative integer, got {N!r}")
    return int(N)


def _check_halfwidth(T) -> float:
    if not (isinstance(T, (int, float, np.integer, np.floating)) and math.isfinite(T) and T > 0):
        raise ValueError(f"Half-width T must be positive, got {T!r}")
    return float(T)


def _monomial_shift(weights: Dict[int, float], sigma: np.ndarray) -> np.ndarray:
    """Coefficients of sum_j b_j (s - sigma)^(2j) in powers of s, vectorised over sigma"""
    top = 2 * max(weights)
    result = np.zeros((top + 1,) + sigma.shape)
    # (s - sigma)^(2j), built by repeated products with s^2 - 2 sigma s + sigma^2
    power = np.zeros_like(result)
    power[0] = 1.0
    for j in range(top // 2 + 1):
        if j > 0:
            step = sigma ** 2 * power
            step[1:] -= 2.0 * sigma * power[:-1]
            step[2:] += power[:-2]
            power = step
        if j in weights:
            result += weights[j] * power
    return result


@dataclass(frozen=True)
class ShiftableExpansion1D:
    """A kernel on [-T, T] with its basis functions and interpolating coefficients.

    `power` is the kernel exponent N of q_N / p_N; `order` is the number of
    basis functions. `rate` is the angular rate gamma of the cosine family or
    the quadratic weight alpha of the polynomial family.
    """
    family: KernelFamily
    power: int
    halfwidth: float
    rate: float
    components: Tuple[KernelComponent, ...]
    truncated_terms: int = 0
    truncation_deviation: float = 0.0

    @property
    def is_truncated(self) -> bool:
        return self.truncated_terms > 0

    @property
    def basis(self) -> Tuple[BasisFunction1D, ...]:
        if self.family is KernelFamily.COSINE:
            functions = []
            for component in self.components:
                frequency = component.index * self.rate
                if component.index == 0:
                    functions.append(BasisFunction1D(BasisKind.COSINE, 0.0))
                else:
                    functions.append(BasisFunction1D(BasisKind.COSINE, frequency))
                    functions.append(BasisFunction1D(BasisKind.SINE, frequency))
            return tuple(functions)
        top = 2 * max(component.index for component in self.components)
        return tuple(BasisFunction1D(BasisKind.MONOMIAL, degree=d, scale=self.halfwidth)
                     for d in range(top + 1))

    @property
    def order(self) -> int:
        return len(self.basis)

    @property
    def fixed_weights(self) -> Tuple[float, ...]:
        """One weight per basis function (cosine/sine pairs share theirs)"""
        if self.family is KernelFamily.COSINE:
            weights = []
            for component in self.components:
                weights.extend([component.weight] * (1 if component.index == 0 else 2))
            return tuple(weights)
        by_degree = {2 * c.index: c.weight for c in self.components}
        return tuple(by_degree.get(d, 0.0) for d in range(self.order))

    def magnitude_bound(self, t_reach: float, tau_reach: float) -> float:
        """Bound on sum_n |c_n(tau) phi_n(t)| for |t|, |tau| within reach of the origin.

        Float rounding in the shifted sum scales with this bound; for monomials
        it grows like ((t_reach + tau_reach) / T)^(2N).
        """
        if self.family is KernelFamily.COSINE:
            return float(sum(abs(c.weight) for c in self.components))
        u = (t_reach + tau_reach) / self.halfwidth
        return float(sum(abs(c.weight) * u ** (2 * c.index) for c in self.components))

    def full_kernel(self, u) -> np.ndarray:
        """Closed form of the untruncated kernel"""
        u = np.asarray(u, dtype=np.float64)
        if self.family is KernelFamily.COSINE:
            return np.cos(self.rate * u) ** self.power
        return (1.0 - self.rate * (u / self.halfwidth) ** 2) ** self.power

    def kernel(self, u) -> np.ndarray:
        """The kernel this expansion reproduces exactly (truncated kernels sum their kept terms)"""
        if not self.is_truncated:
            return self.full_kernel(u)
        u = np.asarray(u, dtype=np.float64)
        total = np.zeros_like(u)
        for component in self.components:
            if self.family is KernelFamily.COSINE:
                total = total + component.weight * np.cos(component.index * self.rate * u)
            else:
                total = total + component.weight * (u / self.halfwidth) ** (2 * component.index)
        return total

    def basis_values(self, t, origin: float = 0.0) -> np.ndarray:
        """phi_n(t - origin); the same origin must be passed to coefficients"""
        t = np.asarray(t, dtype=np.float64) - origin
        return np.stack([phi.evaluate(t) for phi in self.basis])

    def coefficients(self, tau, origin: float = 0.0) -> np.ndarray:
        """c_n(tau - origin), shape (order,) + tau.shape"""
        tau = np.asarray(tau, dtype=np.float64) - origin
        if self.family is KernelFamily.COSINE:
            rows = []
            for component in self.components:
                if component.index == 0:
                    rows.append(np.full(tau.shape, component.weight))
                else:
                    angle = component.index * self.rate * tau
                    rows.append(component.weight * np.cos(angle))
                    rows.append(component.weight * np.sin(angle))
            return np.stack(rows)

        weights = {c.index: c.weight for c in self.components}
        return _monomial_shift(weights, tau / self.halfwidth)

    def shifted(self, t, tau, origin: float = 0.0) -> np.ndarray:
        """sum_n c_n(tau) phi_n(t), the right-hand side of the shift identity"""
        return np.einsum("n...,n...->...", self.coefficients(tau, origin), self.basis_values(t, origin))


def raised_cosine_expansion(N: int, T: float, rate: float = None) -> ShiftableExpansion1D:
    """Expand [cos(rate * t)]^N (rate defaults to pi / 2T) into N + 1 real basis functions"""
    N = _check_order(N)
    T = _check_halfwidth(T)
    gamma = math.pi / (2.0 * T) if rate is None else float(rate)
    if not math.isfinite(gamma):
        raise ValueError(f"Cosine rate must be finite, got {rate!r}")

    # cos^N = 2^-N sum_k C(N,k) exp(i(2k - N)x); conjugate pairs merge into cos/sin
    components = []
    for k in range(N // 2 + 1):
        multiple = N - 2 * k
        if multiple == 0:
            weight = math.comb(N, k) * 2.0 ** (-N)
        else:
            weight = math.comb(N, k) * 2.0 ** (1 - N)
        components.append(KernelComponent(multiple, weight))
    components.sort(key=lambda c: c.index)

    expansion = ShiftableExpansion1D(KernelFamily.COSINE, N, T, gamma, tuple(components))
    logger.debug(f"Raised-cosine expansion: N={N}, T={T}, rate={gamma:.6g}, order={expansion.order}")
    return expansion


def polynomial_expansion(N: int, T: float, rate: float = 1.0) -> ShiftableExpansion1D:
    """Expand (1 - rate * (t/T)^2)^N into the 2N + 1 monomials (t/T)^d"""
    N = _check_order(N)
    T = _check_halfwidth(T)
    alpha = float(rate)
    if not math.isfinite(alpha) or alpha <= 0:
        raise ValueError(f"Polynomial rate must be positive, got {rate!r}")

    components = tuple(KernelComponent(j, math.comb(N, j) * (-alpha) ** j) for j in range(N + 1))
    expansion = ShiftableExpansion1D(KernelFamily.POLY, N, T, alpha, components)
    logger.debug(f"Polynomial expansion: N={N}, T={T}, rate={alpha:.6g}, order={expansion.order}")
    return expansion


def truncate_expansion(expansion: ShiftableExpansion1D, epsilon: float) -> ShiftableExpansion1D:
    """Drop terms whose fixed weight is below epsilon * max weight; no renormalization"""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"Truncation tolerance must be in [0, 1), got {epsilon}")
    if epsilon == 0.0:
        return expansion

    largest = max(abs(c.weight) for c in expansion.components)
    kept = tuple(c for c in expansion.components if abs(c.weight) >= epsilon * largest)
    if len(kept) == len(expansion.components):
        return expansion

    full_order = expansion.order
    truncated = replace(expansion, components=kept, truncated_terms=1)
    grid = np.linspace(-expansion.halfwidth, expansion.halfwidth, ShiftConfig.GRID_POINTS_1D)
    deviation = float(np.max(np.abs(truncated.kernel(grid) - expansion.full_kernel(grid))))
    truncated = replace(truncated,
                        truncated_terms=full_order - truncated.order,
                        truncation_deviation=deviation)
    logger.info(
        f"Truncated expansion from {full_order} to {truncated.order} basis functions "
        f"(epsilon={epsilon}, deviation={deviation:.3e})"
    )
    return truncated


class SeparableExpansion2D:
    """Tensor product kx(x1) * ky(x2); x1 runs along columns, x2 along rows"""

    def __init__(self, kx: ShiftableExpansion1D, ky: ShiftableExpansion1D):
        self.kx = kx
        self.ky = ky

    @property
    def order(self) -> int:
        return self.kx.order * self.ky.order

    @property
    def halfwidth(self) -> float:
        return max(self.kx.halfwidth, self.ky.halfwidth)

    @property
    def is_polynomial(self) -> bool:
        return KernelFamily.POLY in (self.kx.family, self.ky.family)

    def magnitude_bound(self, t_reach: float, tau_reach: float) -> float:
        return self.kx.magnitude_bound(t_reach, tau_reach) * self.ky.magnitude_bound(t_reach, tau_reach)

    def kernel(self, x1, x2) -> np.ndarray:
        return self.kx.kernel(x1) * self.ky.kernel(x2)

    def _images(self, along_x: np.ndarray, along_y: np.ndarray) -> List[np.ndarray]:
        return [np.outer(row, col) for row in along_y for col in along_x]

    def basis_images(self, height: int, width: int, origin: Tuple[float, float] = (0.0, 0.0)) -> List[np.ndarray]:
        """Basis images with pixel (r, c) at x1 = c - origin[1], x2 = r - origin[0]"""
        row0, col0 = origin
        return self._images(self.kx.basis_values(np.arange(width), col0),
                            self.ky.basis_values(np.arange(height), row0))

    def coefficient_images(self, height: int, width: int, origin: Tuple[float, float] = (0.0, 0.0)) -> List[np.ndarray]:
        row0, col0 = origin
        return self._images(self.kx.coefficients(np.arange(width), col0),
                            self.ky.coefficients(np.arange(height), row0))


class DirectionalExpansion2D:
    """Product of N rotated raised cosines, prod_k cos(kappa * (x1 cos th_k + x2 sin th_k)).

    The product expands into plane waves cos(Omega . x); each distinct
    frequency vector contributes a cosine/sine basis pair.
    """

    def __init__(self, directions: int, halfwidth: float, scale: float):
        self.directions = _check_order(directions)
        if self.directions < 1:
            raise ValueError("Directional kernels need at least one direction")
        self.halfwidth = _check_halfwidth(halfwidth)
        self.scale = float(scale)
        self.kappa = math.pi * self.scale / (2.0 * self.halfwidth)
        self.angles = [k * math.pi / self.directions for k in range(self.directions)]
        self.waves = self._plane_waves()

    def _plane_waves(self) -> List[Tuple[float, float, float]]:
        units = [(math.cos(theta), math.sin(theta)) for theta in self.angles]
        weight = 2.0 ** (1 - self.directions)
        merged: Dict[Tuple[int, int], List[float]] = {}
        for signs in itertools.product((1, -1), repeat=self.directions - 1):
            signs = (1,) + signs
            w1 = self.kappa * sum(s * u[0] for s, u in zip(signs, units))
            w2 = self.kappa * sum(s * u[1] for s, u in zip(signs, units))
            # cos is even: keep one representative of +/- Omega
            if abs(w1) < 1e-12 and abs(w2) < 1e-12:
                w1, w2 = 0.0, 0.0
            elif w1 < -1e-12 or (abs(w1) <= 1e-12 and w2 < 0):
                w1, w2 = -w1, -w2
            key = (round(w1 * 1e9), round(w2 * 1e9))
            if key in merged:
                merged[key][2] += weight
            else:
                merged[key] = [w1, w2, weight]
        return sorted((tuple(v) for v in merged.values()), key=lambda v: (v[0] ** 2 + v[1] ** 2, v[0], v[1]))

    @property
    def order(self) -> int:
        return sum(1 if (w1 == 0.0 and w2 == 0.0) else 2 for w1, w2, _ in self.waves)

    @property
    def is_polynomial(self) -> bool:
        return False

    def magnitude_bound(self, t_reach: float, tau_reach: float) -> float:
        return float(sum(abs(weight) for _, _, weight in self.waves))

    def kernel(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        value = np.ones(np.broadcast(x1, x2).shape)
        for theta in self.angles:
            value = value * np.cos(self.kappa * (x1 * math.cos(theta) + x2 * math.sin(theta)))
        return value

    def _wave_terms(self, x1: np.ndarray, x2: np.ndarray, weighted: bool) -> List[np.ndarray]:
        terms = []
        for w1, w2, weight in self.waves:
            factor = weight if weighted else 1.0
            if w1 == 0.0 and w2 == 0.0:
                terms.append(np.full(np.broadcast(x1, x2).shape, factor))
                continue
            phase = w1 * x1 + w2 * x2
            terms.append(factor * np.cos(phase))
            terms.append(factor * np.sin(phase))
        return terms

    def _grid(self, height: int, width: int, origin: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
        rows, cols = np.meshgrid(np.arange(height, dtype=np.float64) - origin[0],
                                 np.arange(width, dtype=np.float64) - origin[1], indexing="ij")
        return cols, rows

    def basis_images(self, height: int, width: int, origin: Tuple[float, float] = (0.0, 0.0)) -> List[np.ndarray]:
        x1, x2 = self._grid(height, width, origin)
        return self._wave_terms(x1, x2, weighted=False)

    def coefficient_images(self, height: int, width: int, origin: Tuple[float, float] = (0.0, 0.0)) -> List[np.ndarray]:
        x1, x2 = self._grid(height, width, origin)
        return self._wave_terms(x1, x2, weighted=True)


ShiftableExpansion2D = Union[SeparableExpansion2D, DirectionalExpansion2D]


def box_expansion(T: float) -> SeparableExpansion2D:
    """The box kernel: a single constant basis image with unit coefficient"""
    # radius 0 is a single-pixel window; the constant basis ignores the half-width
    halfwidth = T if T > 0 else 1.0
    return SeparableExpansion2D(raised_cosine_expansion(0, halfwidth), raised_cosine_expansion(0, halfwidth))
