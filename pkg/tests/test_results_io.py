"""Tests for result tables, sidecars, divergence logging and sample files."""

import json

import numpy as np
import pandas as pd
import pytest
from numpy import testing as npt

from sparsetrig.core import results_io
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.sampling import SEED_RULE_VERSION, draw_continuous, draw_discrete, make_rng
from sparsetrig.core.spectrum import FrequencySet


def _table():
    return pd.DataFrame({"M": [1, 2], "success_rate": [1.0, 0.1 + 0.2]})


def test_resolve_result_path(tmp_path):
    assert results_io.resolve_result_path(tmp_path, "sweep_d100", "sweep") == \
        tmp_path / "sweep_d100_sweep.csv"
    explicit = tmp_path / "mine.csv"
    assert results_io.resolve_result_path(explicit, "ignored", "sweep") == explicit


def test_save_result_writes_stamped_csv_and_sidecar(tmp_path):
    path = tmp_path / "run_sweep.csv"
    params = results_io.build_run_params({"seed": 1}, "abc123")
    results_io.save_result(_table(), path, params, dat_columns=["M", "success_rate"])

    text = path.read_bytes().decode("utf-8")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "M,success_rate,config_hash,seed_rule"
    # 17 significant digits survive the round trip
    assert lines[2] == f"2,0.30000000000000004,abc123,{SEED_RULE_VERSION}"

    sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    assert sidecar == {"config": {"seed": 1}, "config_hash": "abc123",
                       "seed_rule": SEED_RULE_VERSION}

    dat = path.with_suffix(".dat").read_text(encoding="utf-8").splitlines()
    assert dat[0] == "# config_hash=abc123"
    assert dat[1] == "# M success_rate"
    assert dat[2] == "1 1"


def test_divergence_is_logged(tmp_path):
    path = tmp_path / "run_sweep.csv"
    results_io.save_result(_table(), path, results_io.build_run_params({"seed": 1}, "h1"))
    assert not (tmp_path / "_param_mismatches.log").exists()

    results_io.save_result(_table(), path, results_io.build_run_params({"seed": 2}, "h2"))
    log = (tmp_path / "_param_mismatches.log").read_text(encoding="utf-8")
    assert "PARAM_DIVERGENCE" in log
    assert "file=run_sweep.csv" in log
    assert "seed" in log


def test_identical_params_do_not_diverge(tmp_path):
    params = results_io.build_run_params({"seed": 1}, "h1")
    result = results_io.check_param_divergence(params, params, tmp_path / "x.csv", tmp_path)
    assert result == {"diverged": False, "differences": {}}
    assert results_io.check_param_divergence({}, params, tmp_path / "x.csv", tmp_path)["diverged"] is False


def test_load_run_params_missing_or_broken(tmp_path):
    assert results_io.load_run_params(tmp_path / "absent.json") == {}
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert results_io.load_run_params(broken) == {}


def test_load_table_errors(tmp_path):
    with pytest.raises(ConfigError):
        results_io.load_table(tmp_path / "absent.csv")


def test_samples_round_trip(tmp_path):
    sampling = draw_discrete(32, 1, 10, make_rng(1), distinct=True)
    values = np.arange(10) * (1.0 - 0.5j)
    path = results_io.write_samples(sampling.points, values, tmp_path / "samples.csv")
    points, read_values = results_io.read_samples(path)
    npt.assert_array_equal(points, sampling.points)
    npt.assert_array_equal(read_values, values)


def test_continuous_samples_read_back_bit_for_bit(tmp_path):
    rng = make_rng(20080101)
    sampling = draw_continuous(2, 50, rng)
    values = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    path = results_io.write_samples(sampling.points, values, tmp_path / "samples.csv")
    points, read_values = results_io.read_samples(path)
    npt.assert_array_equal(points, sampling.points)
    npt.assert_array_equal(read_values, values)


def test_samples_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"x1": [0.0], "re": [1.0]}).to_csv(path, index=False)
    with pytest.raises(ConfigError):
        results_io.read_samples(path)


def test_coefficients_keep_nonzero_rows(tmp_path):
    base = FrequencySet.centered(8)
    dense = np.zeros(8, dtype=complex)
    dense[[1, 6]] = [2.0, -1j]
    path = results_io.write_coefficients(base, dense, tmp_path / "c.csv")
    freqs, values = results_io.read_coefficients(path)
    assert freqs.ravel().tolist() == [-3, 2]
    npt.assert_array_equal(values, [2.0, -1j])


def test_sampling_frame_has_grid_columns():
    frame = results_io.sampling_frame(draw_discrete(8, 2, 5, make_rng(2)))
    assert list(frame.columns) == ["x1", "x2", "g1", "g2"]
