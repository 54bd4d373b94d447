"""Tests for the seeded experiment runners."""

import math
import os

import numpy as np
import pandas as pd
import pytest
from numpy import testing as npt

from sparsetrig.config import CONFIG
from sparsetrig.core.analysis import eigenvalue_band_samples, sample_bounds
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.sampling import make_rng
from sparsetrig.experiments import (
    CoherenceAudit,
    ExperimentConfig,
    NoiseRun,
    OversamplingSearch,
    SuccessSweep,
    draw_instance,
    loglog_slope,
    run_coherence_audit,
    run_noise,
    run_oversampling_search,
    run_success_sweep,
    run_timing,
)
from sparsetrig.experiments.base_experiment import config_overrides, map_trials
from sparsetrig.experiments.coherence_audit import CHECK_COHERENCE, CHECK_EIGENVALUE_BAND
from sparsetrig.experiments.noise import complex_noise, psnr
from sparsetrig.experiments.timing import blas_threads, timing_shape


def _sweep_config(**kwargs):
    defaults = dict(seed=11, dimension=32, samples=12, sparsities=(0, 1, 2, 14), trials=6,
                    algorithms=("omp", "mp", "thresholding", "bp"))
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# CONFIG
# (つ -' _ '- )つ    (つ -' _ '- )つ

@pytest.mark.parametrize("kwargs", [
    dict(seed=None),
    dict(trials=0),
    dict(model="lattice"),
    dict(algorithms=("omp", "cosamp")),
    dict(samples=None),
    dict(theta=-1.0),
    dict(coefficient_style="laplace"),
    dict(real_mode=True),
    dict(overrides={"no_such_key": 1}),
    dict(workers=0),
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        _sweep_config(**kwargs).validate()


def test_config_hash_ignores_workers():
    a = _sweep_config(workers=1)
    b = _sweep_config(workers=4)
    c = _sweep_config(seed=12)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert "workers" not in a.to_dict()
    assert a.to_dict()["sparsities"] == [0, 1, 2, 14]


def test_samples_for_theta():
    cfg = _sweep_config(theta=2.5)
    assert cfg.samples_for(3) == 8
    assert _sweep_config().samples_for(3) == 12


def test_config_overrides_are_scoped():
    before = CONFIG["success_rel_tol"]
    with config_overrides({"success_rel_tol": 0.5}):
        assert CONFIG["success_rel_tol"] == 0.5
    assert CONFIG["success_rel_tol"] == before


def test_map_trials_preserves_order():
    assert map_trials(lambda t: t * t, range(10), workers=3) == [t * t for t in range(10)]


# (つ -' _ '- )つ    (つ -' _ '- )つ
# PAIRED, NESTED DRAWS
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_draw_instance_is_reproducible():
    cfg = _sweep_config()
    a = draw_instance(cfg, 3, 2)
    b = draw_instance(cfg, 3, 2)
    npt.assert_array_equal(a.truth, b.truth)
    npt.assert_array_equal(a.op.sampling.points, b.op.sampling.points)
    assert a.seed == b.seed
    assert draw_instance(cfg, 4, 2).seed != a.seed


@pytest.mark.parametrize("model", ["fft", "nfft"])
def test_draws_are_nested_in_n(model):
    cfg = _sweep_config(model=model)
    small = draw_instance(cfg, 0, 3, samples=8)
    large = draw_instance(cfg, 0, 3, samples=20)
    npt.assert_array_equal(small.truth, large.truth)
    npt.assert_array_equal(small.op.sampling.points, large.op.sampling.points[:8])


def test_gaussian_model_instance():
    inst = draw_instance(_sweep_config(model="gaussian"), 0, 2)
    assert (inst.op.rows, inst.op.cols) == (12, 32)
    npt.assert_allclose(inst.samples, inst.op.matrix @ inst.truth)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# SUCCESS SWEEP
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_sweep_rows():
    result = run_success_sweep(_sweep_config())
    table = result.table()
    assert list(table.columns) == ["algorithm", "D", "N", "M", "trials", "successes",
                                   "success_rate", "aborted", "skipped"]
    assert len(table) == 4 * 4

    for algorithm in ("omp", "mp", "thresholding", "bp"):
        assert result.success_rate(algorithm, 0) == 1.0

    # M = 14 > N = 12
    for algorithm in ("omp", "thresholding"):
        row = result.row(algorithm, 14)
        assert row["skipped"] and row["trials"] == 0 and math.isnan(row["success_rate"])
    assert not result.row("bp", 14)["skipped"]
    assert all(r["successes"] <= r["trials"] for r in result.rows)
    assert result.row("omp", 1)["success_rate"] == 1.0


def test_sweep_times_only_on_request():
    sweep = SuccessSweep(_sweep_config(sparsities=(1,), algorithms=("omp",)), include_times=True)
    sweep.execute()
    assert "mean_time_s" in sweep.table().columns
    assert sweep.table()["mean_time_s"].iloc[0] > 0


def test_sweep_csv_is_byte_identical(tmp_path):
    paths = []
    for workers, out in ((1, tmp_path / "a"), (1, tmp_path / "b"), (3, tmp_path / "c")):
        paths.append(SuccessSweep(_sweep_config(workers=workers)).save(out, dat=True))
    assert paths[0].name == paths[1].name == paths[2].name
    contents = [p.read_bytes() for p in paths]
    assert contents[0] == contents[1] == contents[2]
    assert paths[0].with_suffix(".json").exists()
    assert paths[0].with_suffix(".dat").exists()


def test_sweep_real_mode():
    cfg = _sweep_config(sparsities=(2,), algorithms=("bp",), coefficient_style="real-gaussian",
                        real_mode=True, samples=14, trials=3)
    assert run_success_sweep(cfg).row("bp", 2)["trials"] == 3


def test_sweep_with_fixed_theta():
    cfg = _sweep_config(theta=4.0, samples=None, sparsities=(1, 2), algorithms=("omp",))
    result = run_success_sweep(cfg)
    assert [r["N"] for r in result.rows] == [4, 8]


# (つ -' _ '- )つ    (つ -' _ '- )つ
# OVERSAMPLING
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_oversampling_full_grid_bound():
    cfg = ExperimentConfig(seed=1, sparsities=(8,), dimensions=(8,), trials=10, target=0.9,
                           algorithms=("omp",), model="fft")
    result = run_oversampling_search(cfg)
    assert result.theta("omp", 8) <= 1.0
    assert result.rows[0]["N_star"] == 8


def test_oversampling_search_structure(tmp_path):
    cfg = ExperimentConfig(seed=2, sparsities=(2,), dimensions=(16, 32), trials=10,
                           target=0.8, algorithms=("omp",), model="nfft")
    search = OversamplingSearch(cfg)
    path = search.save(tmp_path)
    result = search.result
    for row in result.rows:
        if not row["saturated"]:
            assert 2 <= row["N_star"] <= row["D"]
            assert row["rate"] >= 0.8
    assert any(t["N"] == 16 for t in result.trace)
    assert path.with_name(f"{path.stem}_trace.csv").exists()


def test_oversampling_needs_one_sparsity():
    with pytest.raises(ConfigError):
        OversamplingSearch(ExperimentConfig(seed=1, sparsities=(2, 3)))


# (つ -' _ '- )つ    (つ -' _ '- )つ
# TIMING
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_timing_shape():
    assert timing_shape(128) == (1, 14)
    assert timing_shape(4096) == (8, 192)
    assert timing_shape(8192) == (11, 286)


def test_timing_rows():
    cfg = ExperimentConfig(seed=3, dimensions=(256, 128), repeats=1,
                           algorithms=("omp", "omp-lsqr-explicit", "omp-lsqr-implicit"))
    table = run_timing(cfg).table()
    assert table["D"].tolist() == sorted(table["D"].tolist())
    assert (table["seconds"] > 0).all()
    assert len(table) == 6
    assert (table["threads"] == blas_threads()).all()


def test_import_defaults_blas_thread_variables():
    for name in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        assert os.environ.get(name)


def test_blas_threads_reads_the_environment(monkeypatch):
    assert blas_threads({"OMP_NUM_THREADS": "1", "MKL_NUM_THREADS": "8"}) == 1
    assert blas_threads({"OMP_NUM_THREADS": "", "OPENBLAS_NUM_THREADS": "4"}) == 4
    monkeypatch.setattr("os.cpu_count", lambda: 6)
    assert blas_threads({"OMP_NUM_THREADS": "auto"}) == 6
    monkeypatch.setenv("MKL_NUM_THREADS", "2")
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    monkeypatch.delenv("OPENBLAS_NUM_THREADS", raising=False)
    assert blas_threads() == 2


def test_loglog_slope():
    d = np.array([128, 256, 512, 1024])
    table = pd.DataFrame({"algorithm": "omp", "D": d, "seconds": 1e-6 * d ** 1.5})
    assert loglog_slope(table, "omp") == pytest.approx(1.5)
    with pytest.raises(ConfigError):
        loglog_slope(table.iloc[:1], "omp")


# (つ -' _ '- )つ    (つ -' _ '- )つ
# NOISE
# (つ -' _ '- )つ    (つ -' _ '- )つ

def _noise_config(seed=20080101, **kwargs):
    defaults = dict(seed=seed, dimension=300, samples=30, sparsities=(5,), model="nfft",
                    noise_variances=(0.0, 0.05, 0.1, 0.2, 0.4))
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


def test_psnr_and_noise_scale():
    assert psnr(np.ones(3), np.zeros(3)) == math.inf
    assert psnr(np.full(4, 10.0), np.ones(4)) == pytest.approx(20.0)
    z = complex_noise(200_000, make_rng(1))
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.02)
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)


def test_noise_report_shape_and_psnr_order():
    run = NoiseRun(_noise_config())
    report = run.execute()
    clean = report.row(0.0)
    assert clean["psnr_db"] == math.inf
    noisy = [report.row(v)["psnr_db"] for v in (0.05, 0.1, 0.2, 0.4)]
    assert all(b < a for a, b in zip(noisy, noisy[1:]))
    table = run.table()
    assert table["psnr_db"].iloc[0] == CONFIG["psnr_infinite_sentinel"]


def test_seeded_instance_recovered_clean_and_noisy():
    # D = 300, N = 30, M = 5 on the nfft model, one fixed instance
    clean = run_noise(_noise_config(seed=0, noise_variances=(0.0,))).row(0.0)
    assert clean["support_recovered"]
    assert clean["extraneous"] == 0
    assert clean["max_error"] <= 1e-8

    noisy = run_noise(_noise_config(seed=0, noise_variances=(0.2,))).row(0.2)
    assert noisy["support_recovered"]
    assert noisy["max_error"] <= 0.3


def test_noise_rejects_negative_variance():
    with pytest.raises(ConfigError):
        NoiseRun(_noise_config(noise_variances=(-0.1,)))


# (つ -' _ '- )つ    (つ -' _ '- )つ
# COHERENCE AUDIT
# (つ -' _ '- )つ    (つ -' _ '- )つ

def _audit_config(**kwargs):
    defaults = dict(seed=5, dimension=16, sparsities=(2,), trials=50, eps=0.1, delta=0.5)
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


@pytest.mark.parametrize("model", ["fft", "nfft"])
def test_audit_at_the_bound(model):
    result = run_coherence_audit(_audit_config(model=model))
    assert result.fraction(CHECK_COHERENCE, 2) <= 0.1
    assert result.fraction(CHECK_EIGENVALUE_BAND, 2) <= 0.1
    table = result.table()
    assert table["within_eps"].all()
    kind = "discrete" if model == "fft" else "continuous"
    expected = {sample_bounds(16, 2, 1.0, 0.1, kind).coherence,
                eigenvalue_band_samples(2, 0.5, 0.1)}
    assert set(table["N"]) == expected


def test_audit_far_below_the_bound():
    full = run_coherence_audit(_audit_config())
    low = CoherenceAudit(_audit_config(), sample_scale=0.05).execute()
    assert low.fraction(CHECK_COHERENCE, 2) > full.fraction(CHECK_COHERENCE, 2)
    assert low.fraction(CHECK_EIGENVALUE_BAND, 2) >= full.fraction(CHECK_EIGENVALUE_BAND, 2)


def test_audit_rejects_gaussian_model():
    with pytest.raises(ConfigError):
        CoherenceAudit(_audit_config(model="gaussian"))


# (つ -' _ '- )つ    (つ -' _ '- )つ
# LONG MONTE-CARLO RUNS
# (つ -' _ '- )つ    (つ -' _ '- )つ

@pytest.mark.slow
def test_success_band_d100_n40():
    cfg = ExperimentConfig(seed=20080101, dimension=100, samples=40, sparsities=tuple(range(1, 41)),
                           trials=100, algorithms=("omp", "bp"))
    result = run_success_sweep(cfg)
    for m in range(1, 9):
        assert result.success_rate("omp", m) >= 0.95
    for m in range(35, 41):
        assert result.success_rate("omp", m) <= 0.15
    for m in range(1, 41):
        assert abs(result.success_rate("bp", m) - result.success_rate("omp", m)) <= 0.15


@pytest.mark.slow
def test_thresholding_trails_omp_with_unimodular_coefficients():
    cfg = ExperimentConfig(seed=20080101, dimension=100, samples=40, sparsities=(10,),
                           trials=100, coefficient_style="unimodular",
                           algorithms=("omp", "thresholding"))
    result = run_success_sweep(cfg)
    assert result.success_rate("thresholding", 10) < result.success_rate("omp", 10)


@pytest.mark.slow
def test_oversampling_factor_grows_with_dimension():
    cfg = ExperimentConfig(seed=20080101, sparsities=(8,), dimensions=(64, 256, 1024),
                           trials=200, target=0.9, algorithms=("omp",), model="nfft")
    result = run_oversampling_search(cfg)
    thetas = [result.theta("omp", d) for d in (64, 256, 1024)]
    assert all(b >= a for a, b in zip(thetas, thetas[1:]))

    trace = result.trace_table()
    for dimension in (64, 256, 1024):
        rates = trace[trace["D"] == dimension].set_index("N")["rate"]
        for n, rate in rates.items():
            if n + 5 in rates.index:
                assert rates[n + 5] >= rate - 0.05


@pytest.mark.slow
def test_timing_scaling():
    cfg = ExperimentConfig(seed=20080101, repeats=5, algorithms=("omp", "bp"),
                           dimensions=tuple(2 ** k for k in range(7, 14)))
    result = run_timing(cfg)
    assert 1.2 <= result.slope("omp") <= 1.9
    table = result.table()
    for dimension, rows in table.groupby("D"):
        seconds = rows.set_index("algorithm")["seconds"]
        assert seconds["bp"] > seconds["omp"], dimension


@pytest.mark.slow
def test_eigenvalue_band_audit_m8():
    cfg = ExperimentConfig(seed=20080101, dimension=256, sparsities=(8,), trials=200,
                           eps=0.1, delta=0.5)
    result = CoherenceAudit(cfg, checks=(CHECK_EIGENVALUE_BAND,)).execute()
    assert result.fraction(CHECK_EIGENVALUE_BAND, 8) <= 0.1
