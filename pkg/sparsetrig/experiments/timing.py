"""
experiments/timing.py

Wall-clock scaling of the solvers in D.

For each D (powers of two by default) one seeded instance is drawn with
M = max(1, floor(sqrt(D) / 8)) and N = min(D, ceil(2 M log2 D)). Each
algorithm gets one untimed warm-up run, then `repeats` runs timed with
time.perf_counter; the median is reported. Rows are sorted by D.

OMP appears in three least-squares variants: QR update (omp), LSQR on the
stored submatrix (omp-lsqr-explicit) and LSQR through the FFT operator
(omp-lsqr-implicit).

Importing sparsetrig first defaults the BLAS thread variables to 1. Every row
records the thread count in effect: the first of OMP_NUM_THREADS,
OPENBLAS_NUM_THREADS or MKL_NUM_THREADS that is set, else the CPU count.
"""

import logging
import math
import os
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sparsetrig.core.errors import ConfigError
from sparsetrig.core.results_io import SUFFIX_TIMING
from sparsetrig.experiments.base_experiment import (
    BaseExperiment,
    draw_instance,
    run_algorithm,
)

logger = logging.getLogger(__name__)


DEFAULT_DIMENSIONS = tuple(2 ** k for k in range(7, 14))
THREAD_VARIABLES   = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def blas_threads(environ=None):
    """Thread count BLAS was told to use, else the CPU count."""
    environ = os.environ if environ is None else environ
    for name in THREAD_VARIABLES:
        value = environ.get(name, "").strip()
        if value.isdigit() and int(value) >= 1:
            return int(value)
    return os.cpu_count() or 1


def timing_shape(dimension):
    """(M, N) used at dimension D."""
    sparsity = max(1, int(math.isqrt(dimension) // 8))
    samples  = min(dimension, math.ceil(2 * sparsity * math.log2(dimension)))
    return sparsity, samples


def loglog_slope(table, algorithm, column="seconds"):
    """Least-squares slope of log(time) against log(D) for one algorithm."""
    rows = table[table["algorithm"] == algorithm]
    if len(rows) < 2:
        raise ConfigError(f"need at least two dimensions to fit a slope for {algorithm!r}")
    slope, _ = np.polyfit(np.log(rows["D"].to_numpy(dtype=float)),
                          np.log(rows[column].to_numpy(dtype=float)), 1)
    return float(slope)


@dataclass
class TimingResult:
    """Rows of (D, M, N, algorithm, seconds, repeats, threads), sorted by D.

    Attributes:
        rows: list of dict
    """

    rows: list = field(default_factory=list)

    def table(self):
        frame = pd.DataFrame(self.rows, columns=["D", "M", "N", "algorithm",
                                                 "seconds", "repeats", "threads"])
        return frame.sort_values(["D", "algorithm"], kind="stable").reset_index(drop=True)

    def slope(self, algorithm):
        return loglog_slope(self.table(), algorithm)


class TimingRun(BaseExperiment):
    """Median-of-repeats wall-clock timing per (D, algorithm)."""

    name        = "timing"
    suffix      = SUFFIX_TIMING
    dat_columns = ["D", "seconds"]

    def __init__(self, cfg):
        super().__init__(cfg)
        if cfg.repeats < 1:
            raise ConfigError("timing needs repeats >= 1")
        self.dimensions = tuple(sorted(cfg.dimensions or DEFAULT_DIMENSIONS))

    def stem_fields(self):
        return [f"d{self.dimensions[0]}-{self.dimensions[-1]}", self.cfg.model]

    def time_algorithm(self, algorithm, instance):
        """Median seconds over cfg.repeats runs after one warm-up."""
        op, f, m = instance.op, instance.samples, instance.sparsity
        run_algorithm(algorithm, op, f, m, self.cfg.real_mode)
        seconds = []
        for _ in range(self.cfg.repeats):
            start = time.perf_counter()
            run_algorithm(algorithm, op, f, m, self.cfg.real_mode)
            seconds.append(time.perf_counter() - start)
        return statistics.median(seconds)

    def run(self):
        cfg = self.cfg
        result = TimingResult()
        threads = blas_threads()
        logger.info("Timing with %d BLAS thread(s)", threads)
        for dimension in self.dimensions:
            sparsity, samples = timing_shape(dimension)
            instance = draw_instance(cfg, 0, sparsity, samples=samples, dimension=dimension)
            for algorithm in cfg.algorithms:
                seconds = self.time_algorithm(algorithm, instance)
                result.rows.append({"D": dimension, "M": sparsity, "N": samples,
                                    "algorithm": algorithm, "seconds": seconds,
                                    "repeats": cfg.repeats, "threads": threads})
                logger.info("D=%d %s: %.4g s", dimension, algorithm, seconds)
        return result

    def table(self):
        return self.result.table()


def run_timing(cfg):
    """Run the timing sweep and return its TimingResult."""
    return TimingRun(cfg).execute()


# U S A G I
# from sparsetrig.experiments.timing import run_timing
# res = run_timing(ExperimentConfig(seed=1, algorithms=("omp", "bp"), dimensions=(128, 256)))
# res.slope("omp")
