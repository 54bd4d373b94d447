# sparsetrig/__init__.py

"""
sparsetrig - sparse trigonometric polynomial recovery from random samples

Reconstructs sparse multivariate trigonometric polynomials from few random
samples with Orthogonal Matching Pursuit, Matching Pursuit, Thresholding and
Basis Pursuit, with coherence / eigenvalue / restricted isometry diagnostics
and seeded Monte-Carlo experiments.

Subpackages:
    core         - types, operators, solvers, diagnostics, result I/O
    experiments  - success sweep, oversampling search, timing, noise, audit
"""

__version__ = "0.1.0"
__author__  = "laelume"
__license__ = "MIT"

import os

# Single-threaded BLAS unless the caller chose otherwise. Only effective when
# sparsetrig is imported before numpy, which the CLI entry points guarantee.
for _name in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_name, "1")

# (つ -' _ '- )つ    (つ -' _ '- )つ
# Minimal top-level exports, import from submodules for the full API.
# core is imported before anything that reads config.py.
# (つ -' _ '- )つ    (つ -' _ '- )つ

from sparsetrig import core
from sparsetrig.main import main

__all__ = [
    "core",
    "main",
    "__version__",
    "__author__",
    "__license__",
]
