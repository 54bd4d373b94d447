"""Tests for sampling models, draws and seed derivation."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy import testing as npt

from sparsetrig.core.errors import ConfigError, DimensionMismatchError
from sparsetrig.core.sampling import (
    TWO_PI,
    SamplingModel,
    count_duplicates,
    derive_seed,
    draw_continuous,
    draw_discrete,
    draw_gaussian_matrix,
    make_rng,
)


@given(seed=st.integers(0, 2**63), trial=st.integers(0, 10**6), sparsity=st.integers(0, 500))
def test_derive_seed_is_a_pure_function(seed, trial, sparsity):
    assert derive_seed(seed, trial, sparsity) == derive_seed(seed, trial, sparsity)
    assert 0 <= derive_seed(seed, trial, sparsity) < 2**64


def test_derive_seed_separates_keys():
    seeds = {derive_seed(7, t, m) for t in range(20) for m in range(20)}
    assert len(seeds) == 400
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


def test_same_seed_same_stream():
    a = draw_continuous(2, 50, make_rng(99))
    b = draw_continuous(2, 50, make_rng(99))
    npt.assert_array_equal(a.points, b.points)


def test_integer_seed_is_recorded():
    assert draw_continuous(1, 3, 42).seed == 42


def test_continuous_mean():
    draws = 100_000
    x = draw_continuous(1, draws, make_rng(1)).points.ravel()
    assert np.all((x >= 0.0) & (x < TWO_PI))
    stderr = (TWO_PI / math.sqrt(12.0)) / math.sqrt(draws)
    assert abs(x.mean() - math.pi) <= 3.0 * stderr


def test_discrete_frequencies():
    draws = 100_000
    sampling = draw_discrete(4, 1, draws, make_rng(2))
    counts = np.bincount(sampling.grid_indices.ravel(), minlength=4)
    stderr = math.sqrt(0.25 * 0.75 / draws)
    npt.assert_array_less(np.abs(counts / draws - 0.25), 3.5 * stderr)


def test_discrete_points_are_grid_points():
    sampling = draw_discrete(12, 2, 30, make_rng(3))
    npt.assert_allclose(sampling.points, TWO_PI * sampling.grid_indices / 12)
    assert sampling.model.grid == 12
    assert sampling.points.shape == (30, 2)


def test_duplicates_kept_with_replacement():
    for seed in range(100):
        sampling = draw_discrete(8, 1, 50, make_rng(seed))
        assert sampling.size == 50
        assert count_duplicates(sampling) > 0


def test_distinct_draws_have_no_duplicates():
    sampling = draw_discrete(64, 1, 40, make_rng(5), distinct=True)
    assert count_duplicates(sampling) == 0
    full = draw_discrete(16, 1, 16, make_rng(5), distinct=True)
    assert sorted(full.grid_indices.ravel().tolist()) == list(range(16))


def test_distinct_draw_larger_than_grid_rejected():
    with pytest.raises(ConfigError):
        draw_discrete(8, 1, 9, make_rng(0), distinct=True)


@pytest.mark.parametrize("distinct", [True, False])
def test_distinct_draws_are_nested(distinct):
    if not distinct:
        small = draw_continuous(1, 10, make_rng(6))
        large = draw_continuous(1, 25, make_rng(6))
    else:
        small = draw_discrete(64, 1, 10, make_rng(6), distinct=True)
        large = draw_discrete(64, 1, 25, make_rng(6), distinct=True)
    npt.assert_array_equal(small.points, large.points[:10])
    npt.assert_array_equal(large.prefix(10).points, small.points)


def test_invalid_models_rejected():
    with pytest.raises(ConfigError):
        SamplingModel.discrete(1)
    with pytest.raises(ConfigError):
        SamplingModel("lattice")
    with pytest.raises(ConfigError):
        draw_continuous(1, 0, make_rng(0))
    with pytest.raises(ConfigError):
        draw_continuous(1, 3, "seed")


def test_gaussian_column_norms():
    matrix = draw_gaussian_matrix(50, 1000, make_rng(8))
    squared = np.sum(matrix ** 2, axis=0)
    assert abs(squared.mean() - 1.0) <= 0.05


def test_gaussian_matrix_shape_check():
    with pytest.raises(DimensionMismatchError):
        draw_gaussian_matrix(0, 4, make_rng(0))
