"""
experiments/base_experiment.py

Root parent class for all sparsetrig experiments.
Owns the run configuration, the paired trial draw, the solver dispatch and
the worker pool. Delegates persistence to core.results_io.

Subclass hooks (override in experiment subclasses):
    - run()         : execute the experiment, return its result object
    - table()       : result rows as a pandas DataFrame
    - dat_columns   : columns of the optional gnuplot companion
    - stem_fields() : extra fields of the result file stem

Paired trials:
    Trial t at sparsity M is drawn from derive_seed(seed, t, M). The
    coefficient vector and the sampling set come from two child streams of
    that seed, so every algorithm sees the same (T, c, X) and changing N
    keeps c fixed and nests the sampling sets.
"""

import contextlib
import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from sparsetrig.config import CONFIG
from sparsetrig.core import results_io
from sparsetrig.core.basis_pursuit import BPProblem, debias, solve_bp
from sparsetrig.core.errors import ConfigError, SparseTrigError
from sparsetrig.core.greedy import (
    BACKEND_ITERATIVE,
    StoppingRule,
    is_exact_recovery,
    mp,
    omp,
    thresholding,
)
from sparsetrig.core.measurement import GaussianOperator, MeasurementOperator
from sparsetrig.core.sampling import (
    derive_seed,
    draw_continuous,
    draw_discrete,
    draw_gaussian_matrix,
    make_rng,
)
from sparsetrig.core.spectrum import FrequencySet, normalize_style, random_sparse_coefficients

logger = logging.getLogger(__name__)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# MODEL / ALGORITHM NAMES
# Single definition point, the CLI imports from here
# (つ -' _ '- )つ    (つ -' _ '- )つ

MODEL_FFT      = "fft"        # discrete grid, distinct points, FFT fast path
MODEL_NFFT     = "nfft"       # continuous uniform points, direct evaluation
MODEL_GAUSSIAN = "gaussian"   # N(0, 1/N) ensemble
MODELS = (MODEL_FFT, MODEL_NFFT, MODEL_GAUSSIAN)

ALG_OMP           = "omp"
ALG_OMP_EXPLICIT  = "omp-lsqr-explicit"
ALG_OMP_IMPLICIT  = "omp-lsqr-implicit"
ALG_MP            = "mp"
ALG_THRESHOLDING  = "thresholding"
ALG_BP            = "bp"
ALGORITHMS = (ALG_OMP, ALG_OMP_EXPLICIT, ALG_OMP_IMPLICIT, ALG_MP, ALG_THRESHOLDING, ALG_BP)

# Solvers that cannot run with M > N
_NEEDS_M_LE_N = (ALG_OMP, ALG_OMP_EXPLICIT, ALG_OMP_IMPLICIT, ALG_THRESHOLDING)

_COEFFICIENT_STREAM = 0
_SAMPLING_STREAM    = 1


##    <(''<)  <( ' ' )>  (>'')>
# EXPERIMENT CONFIG
##    <(''<)  <( ' ' )>  (>'')>

@dataclass
class ExperimentConfig:
    """Per-run settings shared by every experiment.

    Attributes:
        experiment:        str - 'success-sweep', 'oversampling-search',
                           'timing', 'noise' or 'coherence-audit'
        dimension:         int - D
        samples:           int or None - N (ignored when theta is set)
        theta:             float or None - N = ceil(theta * M) per row
        sparsities:        tuple of int - M range
        trials:            int >= 1
        model:             str - 'fft', 'nfft' or 'gaussian'
        grid:              int or None - m for the fft model, defaults to D
        distinct:          bool - fft model draws distinct grid points
        coefficient_style: str - 'gaussian', 'unimodular' or 'real-gaussian'
        algorithms:        tuple of str
        seed:              int - mandatory
        real_mode:         bool - Basis Pursuit over real coefficients
        dimensions:        tuple of int - D sweep (oversampling, timing)
        target:            float - success rate for the oversampling search
        noise_variances:   tuple of float
        eps:               float - failure probability for the audit
        delta:             float - eigenvalue band half-width for the audit
        repeats:           int - timing repeats
        workers:           int - thread pool size, results do not depend on it
        overrides:         dict - CONFIG keys overridden for this run
    """

    experiment:        str = "success-sweep"
    dimension:         int = 100
    samples:           int = 40
    theta:             float = None
    sparsities:        tuple = (1, 2, 3, 4, 5)
    trials:            int = 100
    model:             str = MODEL_FFT
    grid:              int = None
    distinct:          bool = True
    coefficient_style: str = "gaussian"
    algorithms:        tuple = (ALG_OMP,)
    seed:              int = None
    real_mode:         bool = False
    dimensions:        tuple = ()
    target:            float = 0.9
    noise_variances:   tuple = (0.05, 0.1, 0.2, 0.4)
    eps:               float = 0.1
    delta:             float = 0.5
    repeats:           int = 5
    workers:           int = 1
    overrides:         dict = field(default_factory=dict)

    def __post_init__(self):
        self.sparsities      = tuple(int(m) for m in self.sparsities)
        self.algorithms      = tuple(self.algorithms)
        self.dimensions      = tuple(int(d) for d in self.dimensions)
        self.noise_variances = tuple(float(v) for v in self.noise_variances)
        self.overrides       = dict(self.overrides)

    def validate(self):
        """Raise ConfigError on an unusable configuration."""
        if self.seed is None:
            raise ConfigError("a seed is mandatory")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}, expected one of {MODELS}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms {unknown}, expected a subset of {ALGORITHMS}")
        if self.theta is None and (self.samples is None or self.samples < 1):
            raise ConfigError("either samples >= 1 or theta must be set")
        if self.theta is not None and self.theta <= 0:
            raise ConfigError(f"theta must be positive, got {self.theta}")
        if any(m < 0 for m in self.sparsities):
            raise ConfigError("sparsities must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            style = normalize_style(self.coefficient_style)
        except SparseTrigError as e:
            raise ConfigError(str(e)) from e
        if self.real_mode and style != "real-gaussian":
            raise ConfigError("real mode needs coefficient_style 'real-gaussian'")
        unknown = sorted(set(self.overrides) - set(CONFIG))
        if unknown:
            raise ConfigError(f"unknown tolerance overrides: {unknown}")
        return self

    def to_dict(self):
        """JSON-ready dict; workers is left out since it never changes results."""
        data = asdict(self)
        data.pop("workers")
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    def config_hash(self):
        """SHA-256 over the canonical JSON of to_dict()."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def samples_for(self, sparsity):
        """N for a row: ceil(theta * M) under a fixed theta, else samples."""
        if self.theta is not None:
            return max(1, math.ceil(self.theta * sparsity))
        return self.samples


@contextlib.contextmanager
def config_overrides(overrides):
    """Temporarily apply CONFIG overrides for the duration of a run."""
    saved = {key: CONFIG[key] for key in overrides}
    CONFIG.update(overrides)
    try:
        yield
    finally:
        CONFIG.update(saved)


##    <(''<)  <( ' ' )>  (>'')>
# TRIAL INSTANCES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass
class TrialInstance:
    """One seeded recovery problem.

    Attributes:
        trial:        int
        seed:         int - derive_seed(cfg.seed, trial, M)
        coefficients: SparseCoefficients - ground truth
        op:           LinearMeasurement
        samples:      np.ndarray - f = F_X c
    """

    trial:        int
    seed:         int
    coefficients: object
    op:           object
    samples:      np.ndarray

    @property
    def sparsity(self):
        return self.coefficients.sparsity

    @property
    def truth(self):
        return self.coefficients.dense()


def build_measurement(model, frequencies, count, rng, grid=None, distinct=True, seed=None):
    """Measurement operator for one of the experiment models.

    Args:
        model:       str - 'fft', 'nfft' or 'gaussian'
        frequencies: FrequencySet
        count:       int - N
        rng:         np.random.Generator
        grid:        int or None - m for 'fft', defaults to D
        distinct:    bool - 'fft' draws distinct grid points
        seed:        int or None - recorded on the operator
    """
    dimension = frequencies.dimension
    if model == MODEL_FFT:
        m = frequencies.size if grid is None else grid
        return MeasurementOperator(draw_discrete(m, dimension, count, rng, distinct), frequencies)
    if model == MODEL_NFFT:
        return MeasurementOperator(draw_continuous(dimension, count, rng), frequencies)
    if model == MODEL_GAUSSIAN:
        return GaussianOperator(draw_gaussian_matrix(count, frequencies.size, rng),
                                frequencies, seed)
    raise ConfigError(f"unknown model {model!r}")


def draw_instance(cfg, trial, sparsity, samples=None, dimension=None):
    """Seeded instance for (trial, M), shared by every algorithm.

    Args:
        cfg:       ExperimentConfig
        trial:     int
        sparsity:  int - M
        samples:   int or None - N, defaults to cfg.samples_for(M)
        dimension: int or None - D, defaults to cfg.dimension

    Returns:
        TrialInstance
    """
    dimension = cfg.dimension if dimension is None else dimension
    samples   = cfg.samples_for(sparsity) if samples is None else samples

    seed = derive_seed(cfg.seed, trial, sparsity)
    base = FrequencySet.centered(dimension)
    coefficients = random_sparse_coefficients(
        base, sparsity, cfg.coefficient_style,
        make_rng(derive_seed(seed, _COEFFICIENT_STREAM)))
    op = build_measurement(
        cfg.model, base, samples, make_rng(derive_seed(seed, _SAMPLING_STREAM)),
        grid=cfg.grid, distinct=cfg.distinct, seed=seed)
    return TrialInstance(trial, seed, coefficients, op, op.apply(coefficients.dense()))


##    <(''<)  <( ' ' )>  (>'')>
# SOLVER DISPATCH
##    <(''<)  <( ' ' )>  (>'')>

def skips(algorithm, sparsity, samples):
    """True when the algorithm cannot run at this (M, N)."""
    return algorithm in _NEEDS_M_LE_N and sparsity > samples


def run_algorithm(algorithm, op, samples, sparsity, real_mode=False):
    """Recover a dense coefficient estimate with one named solver.

    Greedy solvers stop at s = M; MP additionally stops on the default
    residual tolerance. Basis Pursuit results are debiased on their detected
    support.

    Returns:
        np.ndarray length D of complex
    """
    if sparsity == 0:
        return np.zeros(op.cols, dtype=np.complex128)

    if algorithm == ALG_OMP:
        return omp(op, samples, StoppingRule(max_sparsity=sparsity)).coefficients
    if algorithm in (ALG_OMP_EXPLICIT, ALG_OMP_IMPLICIT):
        return omp(op, samples, StoppingRule(max_sparsity=sparsity),
                   backend=BACKEND_ITERATIVE,
                   implicit=algorithm == ALG_OMP_IMPLICIT).coefficients
    if algorithm == ALG_MP:
        eps = CONFIG["residual_rel_tol"] * float(np.linalg.norm(samples))
        return mp(op, samples, StoppingRule(max_sparsity=sparsity,
                                            residual_tolerance=eps)).coefficients
    if algorithm == ALG_THRESHOLDING:
        return thresholding(op, samples, sparsity).coefficients
    if algorithm == ALG_BP:
        solution = solve_bp(BPProblem(op, samples, real_mode))
        return debias(op, solution.coefficients, samples, real_mode)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def judge(algorithm, instance, real_mode=False):
    """(success, aborted) for one algorithm on one instance.

    Solver aborts (degenerate selection, unconverged least squares, singular
    systems) count as failures and are reported separately.
    """
    try:
        estimate = run_algorithm(algorithm, instance.op, instance.samples,
                                 instance.sparsity, real_mode)
    except SparseTrigError as e:
        if isinstance(e, ValueError):
            raise
        logger.warning("%s aborted on trial %d (M=%d): %s",
                       algorithm, instance.trial, instance.sparsity, e)
        return False, True
    return is_exact_recovery(estimate, instance.truth), False


def map_trials(function, trials, workers=1):
    """Order-preserving map over trial indices on a thread pool."""
    if workers <= 1:
        return [function(t) for t in trials]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, trials))


##    <(''<)  <( ' ' )>  (>'')>

class BaseExperiment:
    """Root parent class for all experiments.

    Subclasses set name / suffix and implement run() and table().
    """

    name        = "experiment"
    suffix      = "result"
    dat_columns = None

    def __init__(self, cfg):
        self.cfg = cfg.validate()
        self.result = None

    # (つ -' _ '- )つ    (つ -' _ '- )つ
    # SUBCLASS HOOKS
    # (つ -' _ '- )つ    (つ -' _ '- )つ

    def run(self):
        raise NotImplementedError

    def table(self):
        raise NotImplementedError

    def stem_fields(self):
        return [f"d{self.cfg.dimension}"]

    # (つ -' _ '- )つ    (つ -' _ '- )つ
    # SHARED
    # (つ -' _ '- )つ    (つ -' _ '- )つ

    def execute(self):
        """run() with the config's CONFIG overrides in effect."""
        logger.info("Running %s (config %s)", self.name, self.cfg.config_hash()[:12])
        with config_overrides(self.cfg.overrides):
            self.result = self.run()
        return self.result

    def stem(self):
        fields = [self.name, *self.stem_fields(), self.cfg.config_hash()[:8]]
        return "_".join(fields)

    def save(self, out, dat=False):
        """Write the result table and its run_params sidecar.

        Args:
            out: str or Path - output file or directory
            dat: bool - also write the gnuplot companion

        Returns:
            Path - the CSV path
        """
        if self.result is None:
            self.execute()
        path = results_io.resolve_result_path(out, self.stem(), self.suffix)
        params = results_io.build_run_params(self.cfg.to_dict(), self.cfg.config_hash())
        return results_io.save_result(self.table(), path, params,
                                      dat_columns=self.dat_columns if dat else None)


# U S A G I
# from sparsetrig.experiments.base_experiment import ExperimentConfig, draw_instance
# cfg = ExperimentConfig(seed=1)
# inst = draw_instance(cfg, trial=0, sparsity=5)
