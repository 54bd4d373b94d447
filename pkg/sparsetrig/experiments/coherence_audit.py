"""
experiments/coherence_audit.py

Empirical failure rates of the coherence and eigenvalue-band guarantees.

For each M in the range:
    coherence        - N from sample_bounds(...).coherence; over `trials`
                       sampling sets, the fraction with (2M - 1) mu >= 1
    eigenvalue-band  - N from eigenvalue_band_samples(M, delta, eps); over
                       `trials` (support, sampling set) draws, the fraction
                       whose N^{-1} F_TX^* F_TX leaves [1 - delta, 1 + delta]

Both fractions should stay at or below eps. Grid points are drawn with
replacement since N may exceed the grid. sample_scale multiplies both N
(e.g. 0.5 to audit below the bound); trial seeds do not depend on it.
"""

import logging
import math
from dataclasses import dataclass, field

import pandas as pd

from sparsetrig.core.analysis import (
    check_omp_uniform,
    coherence,
    eigenvalue_band_samples,
    gram_eigs,
    sample_bounds,
)
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.results_io import SUFFIX_AUDIT
from sparsetrig.core.sampling import MODEL_CONTINUOUS, MODEL_DISCRETE, derive_seed, make_rng
from sparsetrig.core.spectrum import FrequencySet, random_support
from sparsetrig.experiments.base_experiment import (
    MODEL_FFT,
    MODEL_GAUSSIAN,
    BaseExperiment,
    build_measurement,
    map_trials,
)

logger = logging.getLogger(__name__)


CHECK_COHERENCE = "coherence"
CHECK_EIGENVALUE_BAND = "eigenvalue-band"

_SUPPORT_STREAM  = 0
_SAMPLING_STREAM = 1


@dataclass
class AuditResult:
    """Rows of (check, D, M, N, eps, trials, violations, fraction, within_eps).

    Attributes:
        rows: list of dict
    """

    rows: list = field(default_factory=list)

    def table(self):
        return pd.DataFrame(self.rows, columns=["check", "model", "D", "M", "N", "eps", "trials",
                                                "violations", "fraction", "within_eps"])

    def fraction(self, check, sparsity):
        for row in self.rows:
            if row["check"] == check and row["M"] == sparsity:
                return row["fraction"]
        raise KeyError((check, sparsity))


class CoherenceAudit(BaseExperiment):
    """Violation fractions of the coherence and eigenvalue-band bounds."""

    name        = "audit"
    suffix      = SUFFIX_AUDIT
    dat_columns = ["M", "fraction"]

    def __init__(self, cfg, sample_scale=1.0, checks=(CHECK_COHERENCE, CHECK_EIGENVALUE_BAND)):
        super().__init__(cfg)
        if cfg.model == MODEL_GAUSSIAN:
            raise ConfigError("the audit covers the fft and nfft models only")
        if not 0.0 < cfg.eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {cfg.eps}")
        if sample_scale <= 0:
            raise ConfigError("sample_scale must be positive")
        self.sample_scale = sample_scale
        self.checks = tuple(checks)
        self.base = FrequencySet.centered(cfg.dimension)

    def stem_fields(self):
        return [f"d{self.cfg.dimension}", self.cfg.model, f"eps{self.cfg.eps:g}"]

    def _scaled(self, samples):
        return max(1, math.ceil(self.sample_scale * samples))

    def _operator(self, samples, seed):
        return build_measurement(self.cfg.model, self.base, samples,
                                 make_rng(derive_seed(seed, _SAMPLING_STREAM)),
                                 grid=self.cfg.grid, distinct=False, seed=seed)

    def coherence_samples(self, sparsity):
        kind = MODEL_DISCRETE if self.cfg.model == MODEL_FFT else MODEL_CONTINUOUS
        return self._scaled(sample_bounds(self.base, sparsity, 1.0, self.cfg.eps, kind).coherence)

    def band_samples(self, sparsity):
        return self._scaled(eigenvalue_band_samples(sparsity, self.cfg.delta, self.cfg.eps))

    def coherence_violations(self, sparsity, samples):
        cfg = self.cfg

        def trial(t):
            op = self._operator(samples, derive_seed(cfg.seed, t, sparsity))
            return not check_omp_uniform(coherence(op), sparsity)

        return sum(map_trials(trial, range(cfg.trials), cfg.workers))

    def band_violations(self, sparsity, samples):
        cfg = self.cfg

        def trial(t):
            seed = derive_seed(cfg.seed, t, sparsity)
            support = random_support(self.base.size, sparsity,
                                     make_rng(derive_seed(seed, _SUPPORT_STREAM)))
            report = gram_eigs(self._operator(samples, seed).restrict(support))
            return not report.within_band(cfg.delta)

        return sum(map_trials(trial, range(cfg.trials), cfg.workers))

    def run(self):
        cfg = self.cfg
        result = AuditResult()
        for sparsity in cfg.sparsities:
            if sparsity < 1 or sparsity > cfg.dimension:
                raise ConfigError(f"audit sparsity must lie in [1, D], got {sparsity}")
            for check in self.checks:
                if check == CHECK_COHERENCE:
                    samples = self.coherence_samples(sparsity)
                    violations = self.coherence_violations(sparsity, samples)
                elif check == CHECK_EIGENVALUE_BAND:
                    samples = self.band_samples(sparsity)
                    violations = self.band_violations(sparsity, samples)
                else:
                    raise ConfigError(f"unknown audit check {check!r}")

                fraction = violations / cfg.trials
                result.rows.append({"check": check, "model": cfg.model, "D": cfg.dimension,
                                    "M": sparsity, "N": samples, "eps": cfg.eps,
                                    "trials": cfg.trials, "violations": violations,
                                    "fraction": fraction, "within_eps": fraction <= cfg.eps})
                logger.info("%s M=%d N=%d: %d/%d violations",
                            check, sparsity, samples, violations, cfg.trials)
        return result

    def table(self):
        return self.result.table()


def run_coherence_audit(cfg, sample_scale=1.0):
    """Run the audit and return its AuditResult."""
    return CoherenceAudit(cfg, sample_scale).execute()


# U S A G I
# from sparsetrig.experiments.coherence_audit import run_coherence_audit
# cfg = ExperimentConfig(seed=1, dimension=16, sparsities=(2,), trials=200, eps=0.1)
# run_coherence_audit(cfg).table()
