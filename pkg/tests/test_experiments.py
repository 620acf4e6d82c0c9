"""Tests for the experiment runners at small sizes"""

import math

import numpy as np
import pytest

from lamlen.closedform import moment_P
from lamlen.errors import InvalidConfigError
from lamlen.experiments import (
    chunk_plan,
    execute,
    parallel_map,
    richardson_derivative,
    run_experiment,
)
from lamlen.models import ExperimentConfig
from lamlen.stats import Histogram


class TestRunner:
    def test_chunk_plan(self):
        assert chunk_plan(10, 4) == [(0, 4), (1, 4), (2, 2)]
        assert chunk_plan(8, 4) == [(0, 4), (1, 4)]

    def test_parallel_map_keeps_order(self):
        assert parallel_map(math.sqrt, [1.0, 4.0, 9.0], 1) == [1.0, 2.0, 3.0]
        assert parallel_map(math.sqrt, [1.0, 4.0, 9.0, 16.0], 2) == [1.0, 2.0, 3.0, 4.0]

    def test_richardson_derivative(self):
        x = np.linspace(0.05, 3.0, 20)
        np.testing.assert_allclose(richardson_derivative(np.exp, x), np.exp(x), rtol=1e-10)

    def test_invalid_config_writes_nothing(self, make_config, tmp_path):
        cfg = make_config("E1", samples=0)
        with pytest.raises(InvalidConfigError):
            run_experiment(cfg)
        assert not (tmp_path / "out").exists()


class TestTangentExperiment:
    def test_small_run(self, make_config):
        report = execute(make_config("E1", samples=20_000, chunk_size=5000)).report
        assert report.observations == 20_000
        assert report.criterion("ks_P").value < 0.02
        assert abs(report.criterion("mean").value - moment_P(1)) < 0.03
        assert report.extras["fraction_above_one"] == pytest.approx(1 / math.pi, abs=0.02)
        assert report.runtime > 0

    def test_independent_of_worker_count(self, make_config):
        serial = execute(make_config("E1", samples=8000, chunk_size=2000, jobs=1))
        parallel = execute(make_config("E1", samples=8000, chunk_size=2000, jobs=2))
        assert serial.report.to_dict() == parallel.report.to_dict()
        np.testing.assert_array_equal(serial.histograms[""].counts, parallel.histograms[""].counts)

    def test_chunk_histograms_add_up(self, make_config):
        result = execute(make_config("E1", samples=6000, chunk_size=1000, raw=True))
        hist = result.histograms[""]
        a, b = hist.lo, hist.hi
        whole = Histogram.from_samples(result.raw["chord"], a, b, hist.bins)
        np.testing.assert_array_equal(hist.counts, whole.counts)
        assert (hist.underflow, hist.overflow) == (whole.underflow, whole.overflow)
        assert hist.observations == 6000

    def test_seed_changes_samples(self, make_config):
        first = execute(make_config("E1", samples=2000, seed=1)).report
        second = execute(make_config("E1", samples=2000, seed=2)).report
        assert first.criterion("ks_P").value != second.criterion("ks_P").value

    def test_files(self, make_config, tmp_path):
        run_experiment(make_config("E1", samples=5000, raw=True))
        out = tmp_path / "out"
        assert sorted(p.name for p in out.iterdir()) == ["E1_histogram.csv", "E1_raw.csv", "E1_summary.json"]
        assert (out / "E1_raw.csv").read_text().splitlines()[0] == "chord"
        assert len((out / "E1_histogram.csv").read_text().splitlines()) == 61

    def test_reruns_are_byte_identical(self, tmp_path):
        def files(name):
            cfg = ExperimentConfig("E1", samples=5000, output_dir=str(tmp_path / name))
            run_experiment(cfg)
            return {p.name: p.read_bytes() for p in (tmp_path / name).iterdir()}

        assert files("a") == files("b")


class TestFlowExperiment:
    def test_small_run(self, make_config):
        result = execute(make_config("E2", length_budget=300.0, geodesics=2))
        report = result.report
        assert report.criterion("additivity").passed
        assert report.extras["segments"] == report.observations
        assert report.extras["total_length"] >= 600.0
        length_hist, count_hist = result.histograms["length"], result.histograms["count"]
        assert length_hist.weight_mode == "length"
        assert length_hist.total == pytest.approx(report.extras["total_length"], rel=1e-12)
        assert count_hist.total == report.observations


@pytest.fixture(scope="module")
def moments_result():
    return execute(ExperimentConfig("E3"))


class TestMomentsExperiment:
    @pytest.mark.parametrize(
        "prefix",
        ["integral_", "moment_P_", "antiderivative_span_", "surface_density", "inscribed_disk_gap"],
    )
    def test_identities_hold(self, moments_result, prefix):
        selected = [c for c in moments_result.report.criteria if c.name.startswith(prefix)]
        assert selected
        failed = [c.name for c in selected if not c.passed]
        assert not failed

    def test_numerical_derivatives(self, moments_result):
        for c in moments_result.report.criteria:
            if c.name.startswith(("antiderivative_slope_", "polylog_recurrence_")):
                assert c.value < 1e-7, c.name

    def test_histogram_is_P_mass(self, moments_result):
        hist = moments_result.histograms[""]
        assert hist.weight_mode == "mass"
        assert hist.total == pytest.approx(1.0, abs=1e-12)

    def test_moment_rows(self, moments_result):
        assert [m.order for m in moments_result.report.moments] == [1, 2, 3, 4]
        assert moments_result.report.extras["variance_P"] == pytest.approx(0.7724, abs=1e-4)


class TestWindowExperiment:
    def test_small_run(self, make_config):
        cfg = make_config("E4", samples=3000, proposals=1_000_000, chunk_size=1000, raw=True)
        result = execute(cfg)
        report = result.report
        assert report.observations == 3000
        assert report.criterion("ks_window").value < 0.04
        spread = report.criterion("sector_mass_spread")
        assert spread.passed
        assert spread.value > 0
        assert report.criterion("sector_mass").distance < 0.02
        assert {"mass_12", "mass_21", "mass_13", "mass_31", "mass_23", "mass_32"} <= set(report.extras)
        assert np.all((result.raw["chord"] >= 0.5) & (result.raw["chord"] <= 2.0))

    def test_inverse_scheme(self, make_config):
        report = execute(make_config("E4", samples=2000, proposals=20_000, scheme="inverse")).report
        assert report.criterion("ks_window").value < 0.05


class TestCurrentsExperiment:
    def test_small_run(self, make_config):
        result = execute(make_config("E5", words=5, word_length=10, raw=True))
        report = result.report
        assert report.criterion("additivity").passed
        assert report.observations == 50
        # each word contributes its chords with total weight (chords per period) / period length
        raw = result.raw
        for k in range(5):
            mine = raw["word"] == k
            assert raw["weight"][mine].sum() == pytest.approx(mine.sum() / math.fsum(raw["chord"][mine]), rel=1e-8)
        hist = result.histograms[""]
        assert hist.weight_mode == "current"
        assert hist.total == pytest.approx(raw["weight"].sum(), rel=1e-12)
        assert hist.observations == 50
