import pytest
from unittest.mock import patch

from models.reports import BenchReport
from app.cli.bench import MAX_SPREAD, median_ms, run_bench, synthetic_image


def test_synthetic_image_is_reproducible():
    a = synthetic_image(16, seed=1)
    b = synthetic_image(16, seed=1)
    assert (a.pixels == b.pixels).all()
    assert a.pixels.min() >= 0 and a.pixels.max() <= 255


def test_median_runs_warm_up_first():
    calls = []
    median_ms(lambda: calls.append(1), 3)
    assert len(calls) == 4


def test_report_rejects_nonpositive_timings():
    with pytest.raises(ValueError):
        BenchReport(width=8, height=8, T_values=[1], runs=1, M=1, N=18, shiftable_ms=[0.0])
    with pytest.raises(ValueError):
        BenchReport(width=8, height=8, T_values=[1], runs=1, M=1, N=18, shiftable_ms=[1.0], direct_ms=[2.0])


def test_report_fields_with_direct_path():
    report = run_bench(24, [1, 3], runs=1, direct=True, seed=3)
    assert report.N == 18
    assert report.M == 1
    assert len(report.direct_ms) == 2
    assert report.max_relative_deviation <= 1e-8
    assert report.direct_growth is not None
    assert report.to_dict()["T_values"] == [1, 3]


def test_spread_criterion_is_evaluated():
    timings = iter([1.0, 2.0])
    with patch("app.cli.bench.median_ms", side_effect=lambda run, runs: next(timings)):
        report = run_bench(16, [1, 8], runs=1)
    assert report.shiftable_spread == pytest.approx(2.0)
    assert not report.constant_time
    assert any("spread" in note for note in report.notes)


@pytest.mark.timing
def test_shiftable_time_is_independent_of_radius():
    report = run_bench(512, [2, 4, 8, 16], runs=5, direct=True)
    assert report.shiftable_spread <= MAX_SPREAD
    assert report.direct_growth >= 10
