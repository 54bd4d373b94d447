"""
experiments/noise.py

OMP on samples perturbed by complex gaussian noise.

One seeded instance is drawn (trial 0, sparsity M). A single noise draw z
with independent N(0, 1/2) real and imaginary parts is scaled by sqrt(sigma^2)
for every variance, so the variances share one noise direction. OMP stops at
s = M. Each row reports whether the true support came back, the max
coefficient error and the PSNR

    PSNR = 10 log10(max_j |f(x_j)|^2 / mean_j |noise_j|^2),

infinite (written as CONFIG['psnr_infinite_sentinel']) for sigma^2 = 0.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.greedy import StoppingRule, omp
from sparsetrig.core.results_io import SUFFIX_NOISE
from sparsetrig.core.sampling import derive_seed, make_rng
from sparsetrig.experiments.base_experiment import BaseExperiment, draw_instance

logger = logging.getLogger(__name__)


_NOISE_STREAM = 2


def psnr(clean, noise):
    """Peak signal to noise ratio in dB; inf for zero noise."""
    power = float(np.mean(np.abs(noise) ** 2))
    if power == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.max(np.abs(clean) ** 2)) / power)


def complex_noise(count, rng):
    """count draws of complex gaussian noise with E|z|^2 = 1."""
    return (rng.standard_normal(count) + 1j * rng.standard_normal(count)) / math.sqrt(2.0)


@dataclass
class NoiseReport:
    """Rows of (variance, support_recovered, max_error, psnr, extraneous).

    Attributes:
        rows:         list of dict - one per variance, in config order
        true_support: np.ndarray of int
    """

    rows:         list = field(default_factory=list)
    true_support: np.ndarray = None

    def table(self):
        return pd.DataFrame(self.rows, columns=["variance", "D", "N", "M", "support_recovered",
                                                "max_error", "psnr_db", "extraneous"])

    def row(self, variance):
        for row in self.rows:
            if row["variance"] == variance:
                return row
        raise KeyError(variance)


class NoiseRun(BaseExperiment):
    """OMP support and coefficient recovery under increasing noise."""

    name        = "noise"
    suffix      = SUFFIX_NOISE
    dat_columns = ["variance", "max_error", "psnr_db"]

    def __init__(self, cfg):
        super().__init__(cfg)
        if len(cfg.sparsities) != 1:
            raise ConfigError("the noise experiment takes exactly one sparsity M")
        if any(v < 0 for v in cfg.noise_variances):
            raise ConfigError("noise variances must be >= 0")
        self.sparsity = cfg.sparsities[0]

    def stem_fields(self):
        return [f"d{self.cfg.dimension}", f"n{self.cfg.samples_for(self.sparsity)}",
                f"m{self.sparsity}"]

    def run(self):
        cfg = self.cfg
        instance = draw_instance(cfg, 0, self.sparsity)
        clean = instance.samples
        truth = instance.truth
        support = instance.coefficients.support
        z = complex_noise(clean.size, make_rng(derive_seed(instance.seed, _NOISE_STREAM)))

        report = NoiseReport(true_support=support)
        for variance in cfg.noise_variances:
            noise = math.sqrt(variance) * z
            outcome = omp(instance.op, clean + noise, StoppingRule(max_sparsity=self.sparsity))
            recovered = np.array_equal(outcome.support, support)
            report.rows.append({
                "variance":          variance,
                "D":                 cfg.dimension,
                "N":                 clean.size,
                "M":                 self.sparsity,
                "support_recovered": bool(recovered),
                "max_error":         float(np.max(np.abs(outcome.coefficients - truth))),
                "psnr_db":           psnr(clean, noise),
                "extraneous":        len(outcome.extraneous(support)),
            })
            logger.info("sigma^2=%g: support %s, max error %.3g",
                        variance, "recovered" if recovered else "missed",
                        report.rows[-1]["max_error"])
        return report

    def table(self):
        frame = self.result.table()
        frame["psnr_db"] = [CONFIG["psnr_infinite_sentinel"] if math.isinf(v)
                            else CONFIG["float_format"] % v
                            for v in frame["psnr_db"]]
        return frame


def run_noise(cfg):
    """Run the noise experiment and return its NoiseReport."""
    return NoiseRun(cfg).execute()


# U S A G I
# from sparsetrig.experiments.noise import run_noise
# cfg = ExperimentConfig(seed=1, dimension=300, samples=30, sparsities=(5,), model="nfft")
# run_noise(cfg).table()
