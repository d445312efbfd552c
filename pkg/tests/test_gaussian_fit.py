import math

import numpy as np
import pytest

from models.config import KernelFamily
from app.core.gaussian_fit import (
    KernelValidityError,
    fit_gaussian_polynomial,
    fit_gaussian_raised_cosine,
    kernel_variance,
    polynomial_threshold,
    raised_cosine_threshold,
)
from app.core.kernels import evaluate_kernel, kernel_validity

SIGMA = 40.0
T = 255.0


class TestRaisedCosineFit:
    def test_threshold_order(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T)
        assert fit.N == 17
        assert fit.variant is KernelFamily.COSINE
        assert fit.expansion.order == 18

    def test_wide_kernel_needs_order_one(self):
        assert fit_gaussian_raised_cosine(T, T).N == 1
        assert raised_cosine_threshold(T, T) == 1

    def test_fitted_kernel_is_valid(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T)
        assert kernel_validity(fit.kernel, T).valid

    def test_spec_matches_expansion(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T)
        t = np.linspace(-T, T, 101)
        np.testing.assert_allclose(evaluate_kernel(fit.spec, t), fit.kernel(t), atol=1e-14)
        np.testing.assert_allclose(fit.kernel(t), np.cos(t / (SIGMA * math.sqrt(17))) ** 17)

    def test_sup_error_decreases_with_order(self):
        errors = [fit_gaussian_raised_cosine(SIGMA, T, order=N).sup_error for N in range(17, 41)]
        assert all(b <= a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0]

    def test_variance_close_to_target(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T, order=2 * 17)
        assert kernel_variance(fit.kernel, T) == pytest.approx(SIGMA ** 2, rel=0.1)

    def test_threshold_order_beats_forced_low_order(self):
        forced = fit_gaussian_raised_cosine(SIGMA, T, order=5, force=True)
        assert fit_gaussian_raised_cosine(SIGMA, T).sup_error < forced.sup_error

    def test_order_below_threshold(self):
        with pytest.raises(KernelValidityError):
            fit_gaussian_raised_cosine(SIGMA, T, order=5)
        forced = fit_gaussian_raised_cosine(SIGMA, T, order=5, force=True)
        assert forced.N == 5
        assert not kernel_validity(forced.kernel, T).nonnegative

    def test_truncation_is_recorded(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T, epsilon=0.005)
        assert fit.expansion.truncated_terms == 4
        assert fit.to_report().truncated_terms == 4

    def test_order_cap_warning(self):
        fit = fit_gaussian_raised_cosine(SIGMA, T, order_cap=10)
        assert "exceeds" in fit.warning
        assert fit.to_report().to_dict()["warning"] == fit.warning
        assert fit_gaussian_raised_cosine(SIGMA, T, order_cap=200).warning is None

    def test_report_fields(self):
        report = fit_gaussian_raised_cosine(SIGMA, T).to_report().to_dict()
        assert list(report) == ["sigma", "T", "N", "variant", "sup_error", "truncated_terms"]
        assert report["variant"] == "cosine"
        assert report["N"] == 17

    @pytest.mark.parametrize("sigma,T_,epsilon", [(0.0, T, 0.0), (SIGMA, -1.0, 0.0), (SIGMA, T, 1.0)])
    def test_rejects_bad_arguments(self, sigma, T_, epsilon):
        with pytest.raises(ValueError):
            fit_gaussian_raised_cosine(sigma, T_, epsilon)


class TestPolynomialFit:
    def test_threshold_order(self):
        fit = fit_gaussian_polynomial(SIGMA, T)
        assert fit.N == 21
        assert fit.expansion.order == 43

    def test_half_width_sigma_needs_order_one(self):
        assert polynomial_threshold(T / math.sqrt(2), T) == 1
        assert fit_gaussian_polynomial(T / math.sqrt(2), T).N == 1

    def test_fitted_kernel_is_valid(self):
        fit = fit_gaussian_polynomial(SIGMA, T)
        assert kernel_validity(fit.kernel, T).valid
        t = np.linspace(-T, T, 101)
        np.testing.assert_allclose(fit.kernel(t), (1 - t ** 2 / (2 * 21 * SIGMA ** 2)) ** 21)
        np.testing.assert_allclose(evaluate_kernel(fit.spec, t), fit.kernel(t), atol=1e-14)

    def test_sup_error_decreases_with_order(self):
        errors = [fit_gaussian_polynomial(SIGMA, T, order=N).sup_error for N in range(21, 61)]
        assert all(b <= a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0]

    def test_variance_close_to_target(self):
        fit = fit_gaussian_polynomial(SIGMA, T, order=2 * 21)
        assert kernel_variance(fit.kernel, T) == pytest.approx(SIGMA ** 2, rel=0.1)

    def test_order_below_threshold(self):
        with pytest.raises(KernelValidityError):
            fit_gaussian_polynomial(SIGMA, T, order=20)
