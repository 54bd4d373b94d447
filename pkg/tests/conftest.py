"""Shared fixtures and hypothesis profiles for the sparsetrig test suite."""

import copy
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparsetrig.config import CONFIG
from sparsetrig.core.measurement import MeasurementOperator
from sparsetrig.core.sampling import draw_continuous, draw_discrete, make_rng
from sparsetrig.core.spectrum import FrequencySet, random_sparse_coefficients

settings.register_profile("fast", max_examples=25, deadline=None)
settings.register_profile("ci", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(autouse=True)
def restore_config():
    """Tests may tweak CONFIG; put it back afterwards."""
    saved = copy.deepcopy(CONFIG)
    yield
    CONFIG.clear()
    CONFIG.update(saved)


@pytest.fixture
def rng():
    return make_rng(1234)


class Instance:
    """A seeded (c, X, F_X, f) recovery problem."""

    def __init__(self, coefficients, op):
        self.coefficients = coefficients
        self.op = op
        self.truth = coefficients.dense()
        self.samples = op.apply(self.truth)


@pytest.fixture
def make_instance():
    """Factory: make_instance(D, N, M, seed, grid=True, distinct=True, style='gaussian')."""

    def build(dimension, samples, sparsity, seed, grid=True, distinct=True, style="gaussian"):
        gen = make_rng(seed)
        base = FrequencySet.centered(dimension)
        coefficients = random_sparse_coefficients(base, sparsity, style, gen)
        if grid:
            sampling = draw_discrete(dimension, 1, samples, gen, distinct=distinct)
        else:
            sampling = draw_continuous(1, samples, gen)
        return Instance(coefficients, MeasurementOperator(sampling, base))

    return build


def direct_matrix(op):
    """exp(i k.x_j) by plain broadcasting, independent of the operator code."""
    return np.exp(1j * (op.sampling.points @ op.frequencies.frequencies.T))


@pytest.fixture
def exact_matrix():
    return direct_matrix
