"""
experiments/oversampling.py

Smallest oversampling factor theta* = N*/M reaching a target success rate.

For each D in the sweep, N is binary searched over [M, D] with resolution 1.
Every search step reuses the same per-trial seeds, so the coefficient vectors stay
fixed and the sampling sets are nested in N. Rows where even N = D misses the
target are marked saturated. Every search step is recorded in a trace table.
"""

import logging
from dataclasses import dataclass, field

import pandas as pd

from sparsetrig.core import results_io
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.results_io import SUFFIX_OVERSAMPLE
from sparsetrig.experiments.base_experiment import (
    BaseExperiment,
    draw_instance,
    judge,
    map_trials,
)

logger = logging.getLogger(__name__)


@dataclass
class OversamplingResult:
    """theta*(D) rows plus the search trace.

    Attributes:
        rows:  list of dict - algorithm, D, M, N_star, theta, rate, saturated, trials
        trace: list of dict - algorithm, D, M, N, successes, rate (search order)
    """

    rows:  list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def table(self):
        return pd.DataFrame(self.rows, columns=["algorithm", "D", "M", "N_star", "theta",
                                                "rate", "saturated", "trials"])

    def trace_table(self):
        return pd.DataFrame(self.trace, columns=["algorithm", "D", "M", "N", "successes", "rate"])

    def theta(self, algorithm, dimension):
        for row in self.rows:
            if row["algorithm"] == algorithm and row["D"] == dimension:
                return row["theta"]
        raise KeyError((algorithm, dimension))


class OversamplingSearch(BaseExperiment):
    """Binary search of N* per (algorithm, D) at a fixed sparsity."""

    name        = "oversample"
    suffix      = SUFFIX_OVERSAMPLE
    dat_columns = ["D", "theta"]

    def __init__(self, cfg):
        super().__init__(cfg)
        if len(cfg.sparsities) != 1:
            raise ConfigError("the oversampling search takes exactly one sparsity M")
        if not 0.0 < cfg.target <= 1.0:
            raise ConfigError(f"target rate must lie in (0, 1], got {cfg.target}")
        self.sparsity = cfg.sparsities[0]
        if self.sparsity < 1:
            raise ConfigError("the oversampling search needs M >= 1")
        self.dimensions = cfg.dimensions or (cfg.dimension,)
        too_small = [d for d in self.dimensions if d < self.sparsity]
        if too_small:
            raise ConfigError(f"dimensions {too_small} are below M = {self.sparsity}")

    def stem_fields(self):
        return [f"m{self.sparsity}", self.cfg.model]

    def success_count(self, algorithm, dimension, samples):
        """Exact recoveries over cfg.trials paired instances at (D, N)."""
        cfg = self.cfg

        def trial(t):
            instance = draw_instance(cfg, t, self.sparsity, samples=samples, dimension=dimension)
            return judge(algorithm, instance, cfg.real_mode)[0]

        return sum(map_trials(trial, range(cfg.trials), cfg.workers))

    def _rate_at(self, result, algorithm, dimension, samples, cache):
        if samples not in cache:
            successes = self.success_count(algorithm, dimension, samples)
            cache[samples] = successes / self.cfg.trials
            result.trace.append({"algorithm": algorithm, "D": dimension, "M": self.sparsity,
                                 "N": samples, "successes": successes, "rate": cache[samples]})
            logger.debug("%s D=%d N=%d rate=%.3f", algorithm, dimension, samples, cache[samples])
        return cache[samples]

    def run(self):
        cfg = self.cfg
        result = OversamplingResult()
        m = self.sparsity

        for algorithm in cfg.algorithms:
            for dimension in self.dimensions:
                cache = {}
                top = self._rate_at(result, algorithm, dimension, dimension, cache)
                if top < cfg.target:
                    result.rows.append({"algorithm": algorithm, "D": dimension, "M": m,
                                        "N_star": dimension, "theta": float("nan"),
                                        "rate": top, "saturated": True, "trials": cfg.trials})
                    logger.info("%s D=%d saturated (rate %.3f at N=D)", algorithm, dimension, top)
                    continue

                lo, hi = m, dimension
                while lo < hi:
                    mid = (lo + hi) // 2
                    if self._rate_at(result, algorithm, dimension, mid, cache) >= cfg.target:
                        hi = mid
                    else:
                        lo = mid + 1

                rate = self._rate_at(result, algorithm, dimension, lo, cache)
                result.rows.append({"algorithm": algorithm, "D": dimension, "M": m,
                                    "N_star": lo, "theta": lo / m, "rate": rate,
                                    "saturated": False, "trials": cfg.trials})
                logger.info("%s D=%d: N*=%d theta*=%.3f", algorithm, dimension, lo, lo / m)
        return result

    def table(self):
        return self.result.table()

    def save(self, out, dat=False):
        """Result table plus the search trace next to it."""
        path = super().save(out, dat)
        trace_path = path.with_name(f"{path.stem}_trace.csv")
        results_io.write_table(
            results_io.stamp(self.result.trace_table(), self.cfg.config_hash()), trace_path)
        return path


def run_oversampling_search(cfg):
    """Run the oversampling search and return its OversamplingResult."""
    return OversamplingSearch(cfg).execute()


# U S A G I
# from sparsetrig.experiments.oversampling import run_oversampling_search
# cfg = ExperimentConfig(seed=1, sparsities=(8,), dimensions=(64, 256), trials=200)
# run_oversampling_search(cfg).table()
