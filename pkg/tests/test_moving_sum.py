import numpy as np
import pytest

from models.image import ImageBuffer
from app.core.moving_sum import moving_sum, moving_sum_stack, window_sum


def brute_force(pixels, T):
    height, width = pixels.shape
    out = np.zeros_like(pixels)
    for r in range(height):
        for c in range(width):
            out[r, c] = pixels[max(r - T, 0):r + T + 1, max(c - T, 0):c + T + 1].sum()
    return out


@pytest.fixture
def random_image():
    rng = np.random.default_rng(7)
    return ImageBuffer(rng.uniform(0, 255, size=(64, 64)))


@pytest.fixture
def integer_image():
    rng = np.random.default_rng(11)
    return ImageBuffer(rng.integers(0, 256, size=(40, 50)).astype(float))


class TestMovingSum:
    def test_counts_clipped_windows(self):
        result = moving_sum(ImageBuffer.filled(3, 3, 1.0), 1).pixels
        assert result[1, 1] == 9
        assert result[0, 1] == 6
        assert result[1, 0] == 6
        assert result[0, 0] == 4
        assert result[2, 2] == 4

    def test_zero_radius_is_identity(self, random_image):
        np.testing.assert_array_equal(moving_sum(random_image, 0).pixels, random_image.pixels)

    @pytest.mark.parametrize("T", [1, 3, 7])
    def test_matches_brute_force(self, random_image, T):
        np.testing.assert_allclose(moving_sum(random_image, T).pixels, brute_force(random_image.pixels, T),
                                   rtol=0, atol=1e-10)

    @pytest.mark.parametrize("T", [1, 4, 9])
    def test_exact_on_integer_images(self, integer_image, T):
        np.testing.assert_array_equal(moving_sum(integer_image, T).pixels, brute_force(integer_image.pixels, T))

    def test_window_larger_than_image(self, integer_image):
        result = moving_sum(integer_image, 100).pixels
        np.testing.assert_array_equal(result, np.full(result.shape, integer_image.pixels.sum()))

    def test_linearity(self, random_image, integer_image):
        f = random_image.pixels[:40, :50]
        g = integer_image.pixels
        combined = window_sum(2.5 * f - 0.75 * g, 3)
        np.testing.assert_allclose(combined, 2.5 * window_sum(f, 3) - 0.75 * window_sum(g, 3), rtol=1e-10)

    def test_translation_covariance_in_interior(self, integer_image):
        T = 3
        pixels = integer_image.pixels
        shifted = np.roll(pixels, 1, axis=1)
        a = window_sum(pixels, T)
        b = window_sum(shifted, T)
        # columns whose windows are interior in both images
        np.testing.assert_array_equal(b[T:-T, T + 1:-T - 1], a[T:-T, T:-T - 2])

    @pytest.mark.parametrize("T", [-1, 1.5, True])
    def test_rejects_invalid_radius(self, random_image, T):
        with pytest.raises(ValueError):
            moving_sum(random_image, T)


class TestMovingSumStack:
    def test_empty_stack(self):
        assert moving_sum_stack([], 3) == []

    def test_constant_image(self):
        result = moving_sum_stack([ImageBuffer.filled(5, 5, 2.5)], 1)
        assert result[0].at(2, 2) == 9 * 2.5

    def test_order_is_preserved(self):
        stack = [ImageBuffer.filled(4, 4, float(v)) for v in range(6)]
        result = moving_sum_stack(stack, 1, threads=3)
        assert [r.at(1, 1) for r in result] == [9.0 * v for v in range(6)]

    @pytest.mark.parametrize("threads", [1, 4])
    def test_matches_single_image_path(self, threads):
        rng = np.random.default_rng(5)
        stack = [ImageBuffer(rng.normal(size=(128, 128))) for _ in range(45)]
        result = moving_sum_stack(stack, 5, threads=threads)
        for image, summed in zip(stack, result):
            np.testing.assert_array_equal(summed.pixels, moving_sum(image, 5).pixels)

    def test_rejects_zero_threads(self):
        with pytest.raises(ValueError):
            moving_sum_stack([ImageBuffer.filled(2, 2)], 1, threads=0)
