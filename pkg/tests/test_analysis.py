"""Tests for coherence, Gram eigenvalues, restricted isometry and sample bounds."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy import testing as npt

from sparsetrig.core.analysis import (
    CoherenceReport,
    check_omp_uniform,
    check_thresh_uniform,
    coherence,
    correlation_tail_bound,
    difference_count,
    eigenvalue_band_samples,
    gram_eigs,
    max_recoverable_sparsity,
    ric_bruteforce,
    sample_bounds,
)
from sparsetrig.core.errors import BudgetExceededError, ConfigError, SupportError
from sparsetrig.core.measurement import GaussianOperator, MeasurementOperator
from sparsetrig.core.sampling import (
    SamplingModel,
    draw_continuous,
    draw_discrete,
    draw_gaussian_matrix,
    make_rng,
)
from sparsetrig.core.spectrum import FrequencySet


def _brute_force_coherence(op):
    a = op.dense()
    a = a / np.linalg.norm(a, axis=0)
    gram = np.abs(a.conj().T @ a)
    np.fill_diagonal(gram, 0.0)
    return gram


# (つ -' _ '- )つ    (つ -' _ '- )つ
# COHERENCE
# (つ -' _ '- )つ    (つ -' _ '- )つ

@pytest.mark.parametrize("on_grid", [True, False])
def test_coherence_matches_all_pairs_scan(on_grid):
    for seed in range(5):
        gen = make_rng(seed)
        sampling = draw_discrete(32, 1, 8, gen) if on_grid else draw_continuous(1, 8, gen)
        op = MeasurementOperator(sampling, FrequencySet.centered(32))
        gram = _brute_force_coherence(op)
        report = coherence(op)
        assert report.mu == pytest.approx(gram.max(), abs=1e-12)
        j, k = report.argmax_pair
        assert j != k
        assert gram[j, k] == pytest.approx(report.mu, abs=1e-12)


def test_coherence_full_grid_is_zero():
    op = MeasurementOperator(draw_discrete(16, 1, 16, make_rng(0), distinct=True),
                             FrequencySet.centered(16))
    report = coherence(op)
    assert report.mu == pytest.approx(0.0, abs=1e-12)
    assert report.recovery_bound_sparsity == 16


def test_coherence_collapsed_residue():
    # 16 frequencies on a grid of 8: k and k + 8 give identical columns
    op = MeasurementOperator(draw_discrete(8, 1, 6, make_rng(1)), FrequencySet.centered(16))
    report = coherence(op)
    assert report.mu == 1.0
    j, k = report.argmax_pair
    assert (op.frequencies.frequencies[k, 0] - op.frequencies.frequencies[j, 0]) % 8 == 0
    assert report.recovery_bound_sparsity == 0


def test_coherence_gaussian_ensemble():
    matrix = draw_gaussian_matrix(10, 20, make_rng(2))
    op = GaussianOperator(matrix)
    a = matrix / np.linalg.norm(matrix, axis=0)
    gram = np.abs(a.T @ a)
    np.fill_diagonal(gram, 0.0)
    assert coherence(op).mu == pytest.approx(gram.max(), abs=1e-12)


def test_coherence_needs_two_columns():
    op = MeasurementOperator(draw_continuous(1, 4, make_rng(0)), FrequencySet.centered(1))
    with pytest.raises(SupportError):
        coherence(op)


def test_uniform_predicates():
    report = CoherenceReport(0.1, (0, 1), max_recoverable_sparsity(0.1, 100))
    assert check_omp_uniform(report, 2)
    assert not check_thresh_uniform(report, 2, 4.0)      # 0.3 >= 1/4
    assert check_thresh_uniform(report, 2, 3.0)          # 0.3 < 1/3
    with pytest.raises(ConfigError):
        check_thresh_uniform(report, 2, 0.5)


@given(mu=st.floats(1e-6, 1.0), size=st.integers(1, 10_000))
def test_max_recoverable_sparsity(mu, size):
    m = max_recoverable_sparsity(mu, size)
    assert 0 <= m <= size
    if m >= 1:
        assert (2 * m - 1) * mu < 1.0
    if m < size:
        assert (2 * (m + 1) - 1) * mu >= 1.0


def test_max_recoverable_sparsity_examples():
    assert max_recoverable_sparsity(0.1, 100) == 5
    assert max_recoverable_sparsity(0.0, 37) == 37


# (つ -' _ '- )つ    (つ -' _ '- )つ
# GRAM EIGENVALUES
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_gram_eigs_full_grid_is_identity():
    op = MeasurementOperator(draw_discrete(64, 1, 64, make_rng(3), distinct=True),
                             FrequencySet.centered(64))
    report = gram_eigs(op.restrict(range(0, 64, 8)))
    assert report.lambda_min == pytest.approx(1.0, abs=1e-12)
    assert report.lambda_max == pytest.approx(1.0, abs=1e-12)
    assert report.within_band(1e-9)


def test_gram_eigs_dense_and_lanczos_match_explicit_gram():
    gen = make_rng(4)
    op = MeasurementOperator(draw_continuous(1, 64, gen), FrequencySet.centered(64))
    sub = op.restrict(np.sort(gen.permutation(64)[:8]))
    a = sub.matrix
    eigs = np.linalg.eigvalsh(a.conj().T @ a / 64)

    dense = gram_eigs(sub)
    assert dense.method == "dense"
    assert dense.lambda_min == pytest.approx(eigs[0], abs=1e-10)
    assert dense.lambda_max == pytest.approx(eigs[-1], abs=1e-10)
    assert dense.delta == pytest.approx(max(1 - eigs[0], eigs[-1] - 1), abs=1e-10)

    lanczos = gram_eigs(sub, dense_max=0)
    assert lanczos.method == "lanczos"
    assert lanczos.lambda_min == pytest.approx(eigs[0], abs=1e-8)
    assert lanczos.lambda_max == pytest.approx(eigs[-1], abs=1e-8)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# RESTRICTED ISOMETRY
# (つ -' _ '- )つ    (つ -' _ '- )つ

def _svd_oracle(op, max_sparsity):
    a = op.dense() / np.sqrt(op.rows)
    deltas = []
    for m in range(1, max_sparsity + 1):
        worst = 0.0
        for subset in itertools.combinations(range(op.cols), m):
            s = np.linalg.svd(a[:, subset], compute_uv=False)
            worst = max(worst, 1.0 - s[-1] ** 2, s[0] ** 2 - 1.0)
        deltas.append(max([worst] + deltas))
    return deltas


def test_ric_matches_svd_oracle():
    base = FrequencySet.centered(10)
    for seed in range(10):
        op = MeasurementOperator(draw_discrete(10, 1, 6, make_rng(seed), distinct=True), base)
        report = ric_bruteforce(op, 3)
        assert report.deltas[0] == 0.0
        assert all(b >= a for a, b in zip(report.deltas, report.deltas[1:]))
        npt.assert_allclose(report.deltas, _svd_oracle(op, 3), atol=1e-10)
        assert report.subsets == 10 + 45 + 120
        assert report.crt_sparsity == 1
        assert report.condition_crt == report.crt_holds(1)


def test_ric_delta_one_is_zero_off_grid():
    op = MeasurementOperator(draw_continuous(1, 5, make_rng(5)), FrequencySet.centered(8))
    assert ric_bruteforce(op, 2).delta(1) == 0.0


def test_ric_budget():
    op = MeasurementOperator(draw_continuous(1, 5, make_rng(6)), FrequencySet.centered(30))
    with pytest.raises(BudgetExceededError):
        ric_bruteforce(op, 4, budget=1000)
    with pytest.raises(SupportError):
        ric_bruteforce(op, 0)


def test_crt_holds_needs_three_m():
    op = MeasurementOperator(draw_continuous(1, 5, make_rng(7)), FrequencySet.centered(8))
    report = ric_bruteforce(op, 2)
    assert report.crt_sparsity == 0 and not report.condition_crt
    with pytest.raises(SupportError):
        report.crt_holds(1)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# SAMPLE COUNTS
# (つ -' _ '- )つ    (つ -' _ '- )つ

def test_thresholding_bound_example():
    bounds = sample_bounds(100, 1, 1.0, 0.1, "discrete")
    assert bounds.thresholding == 149
    assert bounds.thresholding == math.ceil(17.89 * math.log(4000))
    assert bounds.omp == math.ceil(32.62 * math.log(8000))
    assert bounds.sparse_solver is None


def test_difference_counts():
    base = FrequencySet.centered(100)
    assert difference_count(base) == 198
    assert difference_count(base, grid=100) == 99
    assert difference_count(FrequencySet.cube(1, dimension=2)) == 24


def test_coherence_bound_uses_model_constant():
    discrete = sample_bounds(16, 2, 1.0, 0.1, SamplingModel.discrete(16))
    continuous = sample_bounds(16, 2, 1.0, 0.1, "continuous")
    assert discrete.difference_count == 15
    assert continuous.difference_count == 30
    assert discrete.coherence == math.ceil(4.94 * 9 * math.log(4 * 15 / 0.1))
    assert continuous.coherence == math.ceil(4.0 / 3.0 * 9 * math.log(4 * 30 / 0.1))
    assert [row[0] for row in discrete.as_rows()] == ["thresholding", "omp", "coherence",
                                                      "sparse-solver"]


def test_sample_bound_validation():
    with pytest.raises(ConfigError):
        sample_bounds(16, 2, 1.0, 1.5, "discrete")
    with pytest.raises(ConfigError):
        sample_bounds(16, 0, 1.0, 0.1, "discrete")
    with pytest.raises(ConfigError):
        sample_bounds(16, 2, 1.0, 0.1, "gaussian")


def test_eigenvalue_band_samples():
    assert eigenvalue_band_samples(8, 0.5, 0.1) == 1305
    assert eigenvalue_band_samples(2, 0.5, 0.1) == 261
    with pytest.raises(ConfigError):
        eigenvalue_band_samples(8, 1.5, 0.1)
    for bad in ((0, 0.5, 0.1), (2.5, 0.5, 0.1), (2, 0.5, 0.0), (2, 0.5, 1.0), (2, float("nan"), 0.1)):
        with pytest.raises(ConfigError):
            eigenvalue_band_samples(*bad)


@given(
    sparsity=st.integers(1, 64),
    delta=st.floats(0.05, 0.95),
    eps=st.floats(1e-12, 0.99),
)
def test_eigenvalue_band_samples_follow_the_closed_form(sparsity, delta, eps):
    c = 1.0 / (1.0 - delta ** 2 / math.e)
    moments = math.ceil(math.log(c * sparsity / eps))
    assert moments >= 1
    expected = math.ceil(3.0 * math.e * sparsity * moments / delta ** 2)
    assert eigenvalue_band_samples(sparsity, delta, eps) == expected
    assert eigenvalue_band_samples(sparsity, delta, eps / 10.0) >= expected


def test_correlation_tail_bound():
    c = np.array([1.0, -0.5j, 0.25])
    values = [correlation_tail_bound(c, 200, x) for x in (0.05, 0.1, 0.2, 0.4)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert correlation_tail_bound(c, 200, 0.0) == 1.0
    assert correlation_tail_bound(np.zeros(3), 10, 0.1) == 0.0


def test_correlation_tail_bound_dominates_empirical_tail():
    rng = np.random.default_rng(20080101)
    support = np.array([-3, 0, 5])
    c = np.array([1.0, -0.5j, 0.25])
    outside, trials, count = 2, 10_000, 20
    points = rng.uniform(0.0, 2.0 * np.pi, size=(trials, count))
    phases = np.exp(1j * np.multiply.outer(points, support - outside))
    correlation = np.abs((phases @ c).mean(axis=1))
    for x in (0.4, 0.6, 0.8, 1.0, 1.5):
        empirical = float(np.mean(correlation >= x))
        margin = 3.0 * math.sqrt(max(empirical * (1.0 - empirical), 1e-4) / trials) + 0.01
        assert empirical <= correlation_tail_bound(c, count, x) + margin
