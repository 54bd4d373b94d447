"""
core/__init__.py

Public interface for the sparsetrig.core package.
Exposes the primary types and the most commonly imported solvers.

Import map:
    errors         - exception hierarchy and CLI exit codes
    spectrum       - FrequencySet, SparseCoefficients, TrigPolynomial
    sampling       - sampling models, sampling sets, seeded streams
    measurement    - F_X operators (FFT / direct / gaussian)
    least_squares  - incremental QR and LSQR backends
    greedy         - omp, mp, thresholding
    basis_pursuit  - l1 minimization, dual certificates, LP oracle
    analysis       - coherence, eigenvalue bounds, RIC, sample counts
    results_io     - result tables, sidecars, sample / coefficient files
"""

# errors first: config.py resolves ConfigError from here
from sparsetrig.core import errors

from sparsetrig.core.spectrum      import FrequencySet, SparseCoefficients, TrigPolynomial
from sparsetrig.core.sampling      import SamplingModel, SamplingSet
from sparsetrig.core.measurement   import GaussianOperator, MeasurementOperator, SupportOperator
from sparsetrig.core.greedy        import RecoveryOutcome, StoppingRule, mp, omp, thresholding
from sparsetrig.core.basis_pursuit import BPProblem, BPSolution, solve_bp

from sparsetrig.core import spectrum
from sparsetrig.core import sampling
from sparsetrig.core import measurement
from sparsetrig.core import least_squares
from sparsetrig.core import greedy
from sparsetrig.core import basis_pursuit
from sparsetrig.core import analysis
from sparsetrig.core import results_io

__all__ = [
    # Types
    "FrequencySet",
    "SparseCoefficients",
    "TrigPolynomial",
    "SamplingModel",
    "SamplingSet",
    "MeasurementOperator",
    "GaussianOperator",
    "SupportOperator",
    "StoppingRule",
    "RecoveryOutcome",
    "BPProblem",
    "BPSolution",
    # Solvers
    "omp",
    "mp",
    "thresholding",
    "solve_bp",
    # Modules, imported as namespaces
    "errors",
    "spectrum",
    "sampling",
    "measurement",
    "least_squares",
    "greedy",
    "basis_pursuit",
    "analysis",
    "results_io",
]
