"""
core/greedy.py

Greedy sparse recovery: Orthogonal Matching Pursuit, ordinary Matching
Pursuit and Thresholding.

Responsibilities:
    - StoppingRule: sparsity cap and/or residual tolerance
    - RecoveryOutcome: coefficients, support and the per-iteration trace
    - omp(): greedy selection + orthogonal projection (QR update or LSQR)
    - mp(): greedy selection + single-coordinate update on unit columns
    - thresholding(): one-shot M largest correlations + least squares
    - is_exact_recovery(): the max-norm success verdict shared by all solvers

Ties in every argmax / sort go to the smallest canonical index.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import (
    DimensionMismatchError,
    LeastSquaresConvergenceError,
    SupportError,
)
from sparsetrig.core.least_squares import QRFactorization, ls_dense, ls_iterative

logger = logging.getLogger(__name__)


BACKEND_QR        = "qr-update"
BACKEND_ITERATIVE = "iterative-ls"
BACKENDS          = (BACKEND_QR, BACKEND_ITERATIVE)


##    <(''<)  <( ' ' )>  (>'')>
# TYPES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True)
class StoppingRule:
    """When a greedy solver stops.

    Attributes:
        max_sparsity:       int or None - stop once s = M
        residual_tolerance: float or None - stop once ||r_s|| <= eps
    """

    max_sparsity:       int = None
    residual_tolerance: float = None

    def __post_init__(self):
        if self.max_sparsity is None and self.residual_tolerance is None:
            raise SupportError("a stopping rule needs a sparsity or a residual tolerance")
        if self.max_sparsity is not None and self.max_sparsity < 0:
            raise SupportError("max_sparsity must be >= 0")
        if self.residual_tolerance is not None and self.residual_tolerance < 0:
            raise SupportError("residual_tolerance must be >= 0")

    @classmethod
    def default(cls, samples, sparsity=None):
        """s = M when M is known, else eps = residual_rel_tol * ||f||."""
        if sparsity is not None:
            return cls(max_sparsity=sparsity)
        eps = CONFIG["residual_rel_tol"] * float(np.linalg.norm(samples))
        return cls(residual_tolerance=eps)

    def done(self, sparsity, residual_norm):
        if self.max_sparsity is not None and sparsity >= self.max_sparsity:
            return True
        return self.residual_tolerance is not None and residual_norm <= self.residual_tolerance


@dataclass
class RecoveryOutcome:
    """Output of a greedy solver.

    Attributes:
        coefficients:     np.ndarray length D - zero off the recovered support
        support:          np.ndarray of int - recovered support, sorted
        iterations:       int
        residual_norms:   list of float - ||r_s|| after each iteration
        selected_indices: list of int - k_s per iteration, in selection order
        algorithm:        str
    """

    coefficients:     np.ndarray
    support:          np.ndarray
    iterations:       int
    residual_norms:   list = field(default_factory=list)
    selected_indices: list = field(default_factory=list)
    algorithm:        str = ""

    def extraneous(self, true_support):
        """Selected indices outside the true support, in selection order."""
        truth = set(int(k) for k in np.asarray(true_support).ravel())
        return [k for k in self.selected_indices if k not in truth]

    def recovered(self, truth, rel_tol=None):
        """Success verdict against the true coefficient vector."""
        return is_exact_recovery(self.coefficients, truth, rel_tol)


def is_exact_recovery(estimate, truth, rel_tol=None):
    """max_k |d_k - c_k| <= rel_tol * max_k |c_k|.

    Args:
        estimate: np.ndarray length D
        truth:    np.ndarray length D or SparseCoefficients
        rel_tol:  float - defaults to CONFIG['success_rel_tol']

    Returns:
        bool - a zero truth requires a zero estimate
    """
    rel_tol = CONFIG["success_rel_tol"] if rel_tol is None else rel_tol
    if hasattr(truth, "dense"):
        truth = truth.dense()
    estimate = np.asarray(estimate, dtype=np.complex128).ravel()
    truth    = np.asarray(truth, dtype=np.complex128).ravel()
    if estimate.size != truth.size:
        raise DimensionMismatchError("estimate and truth differ in length")
    scale = float(np.max(np.abs(truth))) if truth.size else 0.0
    error = float(np.max(np.abs(estimate - truth))) if truth.size else 0.0
    return error <= rel_tol * scale


def _check_samples(op, samples):
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if op.rows == 0:
        raise DimensionMismatchError("cannot recover from zero samples")
    if samples.size != op.rows:
        raise DimensionMismatchError(
            f"sample vector has length {samples.size}, expected N = {op.rows}")
    return samples


def _argmax_excluding(correlations, excluded):
    """Index of the largest |correlation| outside excluded; first wins on ties."""
    magnitude = np.abs(correlations)
    if excluded:
        magnitude[list(excluded)] = -1.0
    k = int(np.argmax(magnitude))
    return k, float(magnitude[k])


##    <(''<)  <( ' ' )>  (>'')>
# ORTHOGONAL MATCHING PURSUIT
##    <(''<)  <( ' ' )>  (>'')>

def omp(op, samples, stop=None, backend=BACKEND_QR, implicit=False,
        ls_tol=None, ls_max_iter=None):
    """Orthogonal Matching Pursuit.

    Each iteration picks k_s = argmax_{k not in T} |<r, phi_k>|, projects f
    onto span{phi_k : k in T_s} and updates the residual. Never runs more
    than N iterations.

    Args:
        op:          LinearMeasurement
        samples:     np.ndarray shape (N,) - f
        stop:        StoppingRule or None - StoppingRule.default(f)
        backend:     str - 'qr-update' or 'iterative-ls'
        implicit:    bool - iterative backend applies F_TX through the
                     parent operator instead of the stored submatrix
        ls_tol:      float or None - iterative tolerance
        ls_max_iter: int or None - iterative iteration cap

    Returns:
        RecoveryOutcome

    Raises:
        DimensionMismatchError:       N = 0 or wrong sample length
        DegenerateSelectionError:     qr-update met a rank-deficient column
        LeastSquaresConvergenceError: iterative-ls did not converge
    """
    f = _check_samples(op, samples)
    stop = StoppingRule.default(f) if stop is None else stop
    if backend not in BACKENDS:
        raise SupportError(f"unknown least-squares backend {backend!r}")
    if stop.max_sparsity is not None and stop.max_sparsity > op.rows:
        raise SupportError(
            f"sparsity {stop.max_sparsity} exceeds the number of samples {op.rows}")

    limit = min(op.rows, op.cols)
    residual = f.copy()
    norm = float(np.linalg.norm(residual))
    selected, norms = [], []
    factorization = QRFactorization(op.rows) if backend == BACKEND_QR else None
    solution = np.empty(0, dtype=np.complex128)

    while len(selected) < limit and not stop.done(len(selected), norm):
        correlations = op.adjoint_apply(residual)
        k, peak = _argmax_excluding(correlations, selected)
        if peak <= CONFIG["correlation_floor"] * op.column_norms[k] * norm:
            logger.debug("OMP: residual orthogonal to all columns after %d steps", len(selected))
            break
        selected.append(k)

        if backend == BACKEND_QR:
            factorization.append(op.columns([k])[:, 0], index=k)
            solution = factorization.solve(f)
            residual = factorization.residual(f)
        else:
            sub = op.restrict(selected)
            result = ls_iterative(sub, f, tol=ls_tol, max_iter=ls_max_iter, implicit=implicit)
            if not result.converged:
                raise LeastSquaresConvergenceError(result.iterations)
            # restrict() sorts the support; map back to selection order
            order = np.argsort(selected, kind="stable")
            solution = np.empty(len(selected), dtype=np.complex128)
            solution[order] = result.solution
            residual = f - (sub.apply_implicit(result.solution) if implicit
                            else sub.apply(result.solution))

        norm = float(np.linalg.norm(residual))
        norms.append(norm)
        logger.debug("OMP step %d: k=%d |corr|=%.3e ||r||=%.3e", len(selected), k, peak, norm)

    coefficients = np.zeros(op.cols, dtype=np.complex128)
    if selected:
        coefficients[selected] = solution

    return RecoveryOutcome(
        coefficients=coefficients,
        support=np.sort(np.asarray(selected, dtype=np.int64)),
        iterations=len(selected),
        residual_norms=norms,
        selected_indices=list(selected),
        algorithm="omp",
    )


##    <(''<)  <( ' ' )>  (>'')>
# ORDINARY MATCHING PURSUIT
##    <(''<)  <( ' ' )>  (>'')>

def mp(op, samples, stop=None, max_iterations=None):
    """Ordinary Matching Pursuit on unit-normalized columns.

    With phi~_k = phi_k / ||phi_k||, each step picks the largest
    |<r, phi~_k>| (indices may repeat) and sets
        d~_k += <r, phi~_k>,   r -= <r, phi~_k> phi~_k.
    Returned coefficients are d~_k / ||phi_k||, i.e. in the unnormalized
    column convention.

    Stops on the residual tolerance, on the iteration cap, when every
    correlation vanishes, or before a step would grow the support past
    stop.max_sparsity distinct indices.

    Args:
        op:             LinearMeasurement
        samples:        np.ndarray shape (N,)
        stop:           StoppingRule or None
        max_iterations: int or None - defaults to CONFIG['mp_max_iterations']

    Returns:
        RecoveryOutcome
    """
    f = _check_samples(op, samples)
    stop = StoppingRule.default(f) if stop is None else stop
    max_iterations = CONFIG["mp_max_iterations"] if max_iterations is None else max_iterations
    eps = stop.residual_tolerance if stop.residual_tolerance is not None else \
        CONFIG["residual_rel_tol"] * float(np.linalg.norm(f))

    norms_col = np.asarray(op.column_norms, dtype=np.float64)
    residual = f.copy()
    norm = float(np.linalg.norm(residual))
    accumulated = np.zeros(op.cols, dtype=np.complex128)
    active, selected, norms = set(), [], []

    while len(selected) < max_iterations and norm > eps:
        correlations = op.adjoint_apply(residual) / norms_col
        k, peak = _argmax_excluding(correlations, ())
        if peak <= CONFIG["correlation_floor"] * norm:
            break
        if (stop.max_sparsity is not None and k not in active
                and len(active) >= stop.max_sparsity):
            break

        step = correlations[k]
        accumulated[k] += step
        residual = residual - step * (op.columns([k])[:, 0] / norms_col[k])
        norm = float(np.linalg.norm(residual))

        active.add(k)
        selected.append(k)
        norms.append(norm)

    coefficients = accumulated / norms_col
    logger.debug("MP: %d iterations, %d distinct indices, ||r||=%.3e",
                 len(selected), len(active), norm)

    return RecoveryOutcome(
        coefficients=coefficients,
        support=np.asarray(sorted(active), dtype=np.int64),
        iterations=len(selected),
        residual_norms=norms,
        selected_indices=selected,
        algorithm="mp",
    )


##    <(''<)  <( ' ' )>  (>'')>
# THRESHOLDING
##    <(''<)  <( ' ' )>  (>'')>

def thresholding(op, samples, sparsity):
    """Keep the M largest |<f, phi_k>| and fit them by least squares.

    Args:
        op:       LinearMeasurement
        samples:  np.ndarray shape (N,)
        sparsity: int - M, 1 <= M <= N

    Returns:
        RecoveryOutcome

    Raises:
        SupportError: M < 1 or M > N
    """
    f = _check_samples(op, samples)
    if sparsity < 1:
        raise SupportError("thresholding needs M >= 1")
    if sparsity > op.rows:
        raise SupportError(
            f"thresholding with M = {sparsity} > N = {op.rows} is underdetermined")

    magnitude = np.abs(op.adjoint_apply(f))
    # Stable sort on -|.| keeps the smallest index first among ties
    support = np.sort(np.argsort(-magnitude, kind="stable")[:sparsity])

    sub = op.restrict(support)
    solution = ls_dense(sub, f)
    residual = f - sub.apply(solution)

    coefficients = np.zeros(op.cols, dtype=np.complex128)
    coefficients[support] = solution

    return RecoveryOutcome(
        coefficients=coefficients,
        support=support.astype(np.int64),
        iterations=1,
        residual_norms=[float(np.linalg.norm(residual))],
        selected_indices=[int(k) for k in support],
        algorithm="thresholding",
    )


# U S A G I
# from sparsetrig.core.greedy import omp, StoppingRule
# outcome = omp(op, f, StoppingRule(max_sparsity=5))
# outcome.recovered(c)
