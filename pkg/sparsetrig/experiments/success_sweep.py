"""
experiments/success_sweep.py

Success rate versus sparsity for a set of algorithms on paired trials.

For every M in the range and every trial t, one instance (T, c, X) is drawn
from derive_seed(seed, t, M) and handed to every algorithm. A row per
(algorithm, M) counts exact recoveries.

Rows where the algorithm cannot run (M > N for OMP and thresholding) are
kept and marked skipped. M = 0 rows succeed trivially.

Wall-clock means are kept in memory; the CSV only carries them when
include_times is set, since timings are not reproducible.
"""

import logging
import time
from dataclasses import dataclass, field

import pandas as pd

from sparsetrig.core.results_io import SUFFIX_SWEEP
from sparsetrig.experiments.base_experiment import (
    BaseExperiment,
    draw_instance,
    judge,
    map_trials,
    skips,
)

logger = logging.getLogger(__name__)


SWEEP_COLUMNS = ["algorithm", "D", "N", "M", "trials", "successes", "success_rate",
                 "aborted", "skipped"]


@dataclass
class SweepResult:
    """Rows of (algorithm, D, N, M, trials, successes, mean time).

    Attributes:
        rows: list of dict - one per (algorithm, M), in M then algorithm order
    """

    rows: list = field(default_factory=list)

    def table(self, include_times=False):
        columns = SWEEP_COLUMNS + (["mean_time_s"] if include_times else [])
        return pd.DataFrame(self.rows, columns=SWEEP_COLUMNS + ["mean_time_s"])[columns]

    def row(self, algorithm, sparsity):
        for row in self.rows:
            if row["algorithm"] == algorithm and row["M"] == sparsity:
                return row
        raise KeyError((algorithm, sparsity))

    def success_rate(self, algorithm, sparsity):
        return self.row(algorithm, sparsity)["success_rate"]


class SuccessSweep(BaseExperiment):
    """Success-rate sweep over sparsities, one row per (algorithm, M)."""

    name        = "sweep"
    suffix      = SUFFIX_SWEEP
    dat_columns = ["M", "success_rate"]

    def __init__(self, cfg, include_times=False):
        super().__init__(cfg)
        self.include_times = include_times

    def stem_fields(self):
        cfg = self.cfg
        n_field = f"theta{cfg.theta:g}" if cfg.theta is not None else f"n{cfg.samples}"
        return [f"d{cfg.dimension}", n_field, cfg.model]

    def _trial(self, sparsity, samples, trial):
        """{algorithm: (success, aborted, seconds)} for one paired instance."""
        cfg = self.cfg
        instance = draw_instance(cfg, trial, sparsity, samples=samples)
        outcome = {}
        for algorithm in cfg.algorithms:
            if skips(algorithm, sparsity, samples):
                continue
            start = time.perf_counter()
            success, aborted = judge(algorithm, instance, cfg.real_mode)
            outcome[algorithm] = (success, aborted, time.perf_counter() - start)
        return outcome

    def run(self):
        cfg = self.cfg
        result = SweepResult()

        for sparsity in cfg.sparsities:
            samples = cfg.samples_for(sparsity)
            if sparsity > cfg.dimension:
                logger.warning("Skipping M=%d > D=%d", sparsity, cfg.dimension)
                outcomes = []
            else:
                outcomes = map_trials(lambda t: self._trial(sparsity, samples, t),
                                      range(cfg.trials), cfg.workers)

            for algorithm in cfg.algorithms:
                skipped = sparsity > cfg.dimension or skips(algorithm, sparsity, samples)
                runs = [] if skipped else [o[algorithm] for o in outcomes]
                successes = sum(1 for success, _, _ in runs if success)
                aborted   = sum(1 for _, abort, _ in runs if abort)
                seconds   = [s for _, _, s in runs]
                result.rows.append({
                    "algorithm":    algorithm,
                    "D":            cfg.dimension,
                    "N":            samples,
                    "M":            sparsity,
                    "trials":       0 if skipped else cfg.trials,
                    "successes":    successes,
                    "success_rate": float("nan") if skipped else successes / cfg.trials,
                    "aborted":      aborted,
                    "skipped":      skipped,
                    "mean_time_s":  sum(seconds) / len(seconds) if seconds else float("nan"),
                })
            logger.info("M=%d: %s", sparsity,
                        ", ".join(f"{r['algorithm']}={r['successes']}/{r['trials']}"
                                  for r in result.rows[-len(cfg.algorithms):]))
        return result

    def table(self):
        return self.result.table(self.include_times)


def run_success_sweep(cfg, include_times=False):
    """Run a success-rate sweep and return its SweepResult."""
    return SuccessSweep(cfg, include_times).execute()


# U S A G I
# from sparsetrig.experiments.success_sweep import run_success_sweep
# result = run_success_sweep(ExperimentConfig(seed=1, algorithms=("omp", "bp")))
# result.table()
