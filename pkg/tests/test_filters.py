import logging

import numpy as np
import pytest

from models.image import ImageBuffer
from app.core.expansions import raised_cosine_expansion
from app.core.filters import (
    BilateralConfig,
    KernelConditioningError,
    RangeSpanError,
    bilateral_filter_direct,
    bilateral_filter_shiftable,
    build_basis_stack,
    max_relative_deviation,
    spatial_filter_direct,
    spatial_filter_shiftable,
)
from app.core.gaussian_fit import KernelValidityError, fit_gaussian_polynomial, fit_gaussian_raised_cosine
from app.core.kernels import Box, PolyWindow, RaisedCosine, Separable2D, evaluate_kernel, four_direction_kernel
from app.core.moving_sum import moving_sum

SEPARABLE_Q4 = Separable2D(RaisedCosine(4, 4), RaisedCosine(4, 4))


def random_image(seed, size):
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, size=(size, size)).astype(float))


@pytest.fixture(scope="module")
def range_fit():
    return fit_gaussian_raised_cosine(40.0, 255.0)


class TestSpatialFilter:
    @pytest.mark.parametrize("kernel", [SEPARABLE_Q4, Box(4)])
    def test_constant_image_is_unchanged(self, kernel):
        image = ImageBuffer.filled(12, 10, 97.0)
        np.testing.assert_allclose(spatial_filter_direct(image, kernel, 4).pixels, 97.0, rtol=1e-12)
        np.testing.assert_allclose(spatial_filter_shiftable(image, kernel, 4).pixels, 97.0, rtol=1e-12)

    def test_impulse_response_is_normalized_kernel(self):
        T = 2
        kernel = Separable2D(RaisedCosine(2, T), RaisedCosine(2, T))
        pixels = np.zeros((9, 9))
        pixels[4, 4] = 1.0
        result = spatial_filter_direct(ImageBuffer(pixels), kernel, T).pixels

        offsets = np.arange(-T, T + 1, dtype=float)
        x1, x2 = np.meshgrid(offsets, offsets)
        mass = evaluate_kernel(kernel, (x1, x2)).sum()
        for r in range(2, 7):
            for c in range(2, 7):
                expected = float(evaluate_kernel(kernel, (4.0 - c, 4.0 - r))) / mass
                assert result[r, c] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_shiftable_matches_direct(self, seed):
        image = random_image(seed, 32)
        direct = spatial_filter_direct(image, SEPARABLE_Q4, 4)
        shiftable = spatial_filter_shiftable(image, SEPARABLE_Q4, 4)
        assert max_relative_deviation(shiftable, direct) <= 1e-8

    def test_directional_kernel_matches_direct(self):
        image = random_image(42, 24)
        kernel = four_direction_kernel(4.0)
        direct = spatial_filter_direct(image, kernel, 4)
        shiftable = spatial_filter_shiftable(image, kernel, 4)
        assert max_relative_deviation(shiftable, direct) <= 1e-8

    def test_box_is_moving_average(self):
        image = random_image(3, 20)
        expected = moving_sum(image, 3).pixels / moving_sum(ImageBuffer.filled(20, 20, 1.0), 3).pixels
        np.testing.assert_allclose(spatial_filter_shiftable(image, Box(3), 3).pixels, expected, rtol=1e-12)
        zero_order = Separable2D(RaisedCosine(0, 3), RaisedCosine(0, 3))
        np.testing.assert_allclose(spatial_filter_shiftable(image, zero_order, 3).pixels, expected, rtol=1e-12)

    def test_zero_radius_keeps_image(self):
        image = random_image(4, 8)
        np.testing.assert_array_equal(spatial_filter_shiftable(image, Box(0), 0).pixels, image.pixels)

    @pytest.mark.parametrize("size", [64, 256])
    def test_polynomial_kernel_matches_direct(self, size):
        image = random_image(31, size)
        kernel = Separable2D(PolyWindow(2, 4), PolyWindow(2, 4))
        deviation = max_relative_deviation(spatial_filter_shiftable(image, kernel, 4),
                                           spatial_filter_direct(image, kernel, 4))
        assert deviation <= 1e-8

    def test_polynomial_kernel_is_filtered_in_tiles(self, caplog):
        caplog.set_level(logging.INFO)
        image = random_image(32, 40)
        kernel = Separable2D(PolyWindow(2, 4), PolyWindow(2, 4))
        shiftable = spatial_filter_shiftable(image, kernel, 4, threads=2)
        assert "20x20 tiles" in caplog.text
        assert max_relative_deviation(shiftable, spatial_filter_direct(image, kernel, 4)) <= 1e-8

    def test_hopelessly_conditioned_polynomial_is_refused(self):
        kernel = Separable2D(PolyWindow(40, 1), PolyWindow(40, 1))
        with pytest.raises(KernelConditioningError):
            spatial_filter_shiftable(random_image(6, 8), kernel, 1)
        assert issubclass(KernelConditioningError, KernelValidityError)


class TestBilateralFilter:
    def test_config_checks_window_radius(self, range_fit):
        with pytest.raises(ValueError):
            BilateralConfig(Box(4), range_fit.expansion, 5)
        with pytest.raises(ValueError):
            BilateralConfig(RaisedCosine(2, 5), range_fit.expansion, 5)

    def test_constant_image_is_unchanged(self, range_fit):
        image = ImageBuffer.filled(16, 16, 120.0)
        config = BilateralConfig(Box(3), range_fit.expansion, 3)
        np.testing.assert_allclose(bilateral_filter_direct(image, config).pixels, 120.0, rtol=1e-12)
        np.testing.assert_allclose(bilateral_filter_shiftable(image, config).pixels, 120.0, rtol=1e-12)

    def test_flat_range_kernel_reduces_to_spatial_filter(self):
        image = random_image(8, 24)
        config = BilateralConfig(SEPARABLE_Q4, raised_cosine_expansion(0, 255.0), 4)
        np.testing.assert_allclose(bilateral_filter_direct(image, config).pixels,
                                   spatial_filter_direct(image, SEPARABLE_Q4, 4).pixels, rtol=1e-10)
        np.testing.assert_allclose(bilateral_filter_shiftable(image, config).pixels,
                                   spatial_filter_shiftable(image, SEPARABLE_Q4, 4).pixels, rtol=1e-10)

    def test_full_degeneration_is_moving_average(self):
        image = random_image(9, 20)
        config = BilateralConfig(Box(2), raised_cosine_expansion(0, 255.0), 2)
        expected = moving_sum(image, 2).pixels / moving_sum(ImageBuffer.filled(20, 20, 1.0), 2).pixels
        np.testing.assert_allclose(bilateral_filter_shiftable(image, config).pixels, expected, rtol=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_shiftable_matches_direct(self, seed, range_fit):
        image = random_image(100 + seed, 64)
        config = BilateralConfig(Box(5), range_fit.expansion, 5)
        assert range_fit.N == 17
        deviation = max_relative_deviation(bilateral_filter_shiftable(image, config),
                                           bilateral_filter_direct(image, config))
        assert deviation <= 1e-8

    def test_separable_spatial_kernel_matches_direct(self, range_fit):
        image = random_image(77, 24)
        config = BilateralConfig(SEPARABLE_Q4, range_fit.expansion, 4)
        deviation = max_relative_deviation(bilateral_filter_shiftable(image, config, threads=2),
                                           bilateral_filter_direct(image, config))
        assert deviation <= 1e-8

    def test_output_stays_in_input_range(self, range_fit):
        image = random_image(12, 32)
        config = BilateralConfig(Box(4), range_fit.expansion, 4)
        result = bilateral_filter_shiftable(image, config).pixels
        assert result.min() >= image.pixels.min() - 1e-9
        assert result.max() <= image.pixels.max() + 1e-9

    def test_step_edge_is_preserved(self):
        pixels = np.zeros((32, 32))
        pixels[:, 16:] = 250.0
        image = ImageBuffer(pixels)
        fit = fit_gaussian_raised_cosine(30.0, 255.0)
        assert fit.N == 30
        config = BilateralConfig(Box(3), fit.expansion, 3)
        for result in (bilateral_filter_direct(image, config), bilateral_filter_shiftable(image, config)):
            assert np.max(np.abs(result.pixels - pixels)) < 1e-6

    def test_mirror_symmetry(self, range_fit):
        half = random_image(21, 16).pixels
        image = ImageBuffer(np.hstack([half, half[:, ::-1]]))
        config = BilateralConfig(Box(3), range_fit.expansion, 3)
        result = bilateral_filter_shiftable(image, config).pixels
        np.testing.assert_allclose(result, result[:, ::-1], rtol=0, atol=1e-10)

    def test_polynomial_range_kernel_matches_direct(self):
        fit = fit_gaussian_polynomial(40.0, 255.0)
        assert fit.N == 21
        image = random_image(140, 64)
        config = BilateralConfig(Box(5), fit.expansion, 5)
        deviation = max_relative_deviation(bilateral_filter_shiftable(image, config),
                                           bilateral_filter_direct(image, config))
        assert deviation <= 1e-8

    def test_polynomial_range_on_non_integer_intensities(self):
        fit = fit_gaussian_polynomial(40.0, 255.0)
        rng = np.random.default_rng(141)
        image = ImageBuffer(rng.uniform(0.0, 255.0, size=(48, 48)))
        config = BilateralConfig(Box(3), fit.expansion, 3)
        deviation = max_relative_deviation(bilateral_filter_shiftable(image, config),
                                           bilateral_filter_direct(image, config))
        assert deviation <= 1e-8

    def test_polynomial_spatial_kernel_matches_direct(self, range_fit):
        image = random_image(142, 48)
        config = BilateralConfig(Separable2D(PolyWindow(2, 4), PolyWindow(2, 4)), range_fit.expansion, 4)
        deviation = max_relative_deviation(bilateral_filter_shiftable(image, config),
                                           bilateral_filter_direct(image, config))
        assert deviation <= 1e-8

    def test_truncated_range_kernel(self):
        fit = fit_gaussian_raised_cosine(40.0, 255.0, epsilon=0.005)
        assert fit.expansion.is_truncated
        deviation_bound = fit.expansion.truncation_deviation
        assert deviation_bound > 0

        image = random_image(143, 64)
        T = 5
        config = BilateralConfig(Box(T), fit.expansion, T)
        shiftable = bilateral_filter_shiftable(image, config)
        assert max_relative_deviation(shiftable, bilateral_filter_direct(image, config)) <= 1e-8

        # weights may dip to -deviation_bound; the self weight stays near 1
        low, high = image.pixels.min(), image.pixels.max()
        window = (2 * T + 1) ** 2
        slack = window * deviation_bound * (high - low) / (1.0 - window * deviation_bound)
        assert shiftable.pixels.min() >= low - slack
        assert shiftable.pixels.max() <= high + slack

    def test_rejects_narrow_range_kernel(self):
        image = random_image(1, 16)
        config = BilateralConfig(Box(2), raised_cosine_expansion(4, 50.0), 2)
        with pytest.raises(RangeSpanError):
            bilateral_filter_shiftable(image, config)

    def test_basis_stack_images(self, range_fit):
        image = random_image(5, 10)
        config = BilateralConfig(SEPARABLE_Q4, range_fit.expansion, 4)
        stack = build_basis_stack(image, config)
        assert stack.M == 25 and stack.N == 18
        assert len(stack.coeff_images) == len(stack.numerator_images) == len(stack.denominator_images) == 450

        phi = config.spatial_expansion.basis_images(10, 10)
        psi = range_fit.expansion.basis_values(image.pixels)
        m, n = 7, 11
        k = m * stack.N + n
        np.testing.assert_allclose(stack.denominator_images[k], phi[m] * psi[n])
        np.testing.assert_allclose(stack.numerator_images[k], phi[m] * psi[n] * image.pixels)


def test_relative_deviation_floors_reference():
    a = ImageBuffer(np.array([[0.5, 100.0]]))
    b = ImageBuffer(np.array([[0.0, 101.0]]))
    assert max_relative_deviation(a, b) == pytest.approx(0.5)
