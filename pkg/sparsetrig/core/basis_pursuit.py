"""
core/basis_pursuit.py

Equality-constrained l1 minimization:  min ||d||_1  subject to  F_X d = f.

Responsibilities:
    - BPProblem / BPSolution types
    - solve_bp(): Douglas-Rachford splitting between the l1 proximal map
      (complex or real soft-thresholding) and the exact affine projection
      d -> d - F^*(F F^*)^{-1}(F d - f), with F F^* factored once
    - debias(): least squares on the detected support, used for verdicts
    - check_dual_certificate(): l1 optimality certificate for a candidate
    - solve_bp_real_lp_check(): dense linear program for tiny real problems,
      used as an independent oracle for the splitting solver

Real mode restricts d to real vectors. Its constraint F d = f is the stacked
real system [Re F; Im F] d = [Re f; Im f], whose rows can be dependent
(grid points 0 and pi give purely real rows); that system is projected with an
orthonormal row-space basis instead of a Cholesky factor.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import (
    CyclingGuardError,
    DimensionMismatchError,
    InfeasibleProblemError,
    SingularSystemError,
    SupportError,
)
from sparsetrig.core.least_squares import ls_dense

logger = logging.getLogger(__name__)


##    <(''<)  <( ' ' )>  (>'')>
# TYPES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass
class BPProblem:
    """One Basis Pursuit instance.

    Attributes:
        op:        LinearMeasurement
        samples:   np.ndarray shape (N,) of complex
        real_mode: bool - restrict d to real values
    """

    op:        object
    samples:   np.ndarray
    real_mode: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128).ravel()
        if self.samples.size != self.op.rows:
            raise DimensionMismatchError(
                f"sample vector has length {self.samples.size}, expected N = {self.op.rows}")


@dataclass
class BPSolution:
    """Solver output.

    Attributes:
        coefficients:        np.ndarray length D
        objective:           float - sum |d_k|
        constraint_residual: float - ||F d - f||_2
        iterations:          int
        converged:           bool
    """

    coefficients:        np.ndarray
    objective:           float
    constraint_residual: float
    iterations:          int
    converged:           bool


@dataclass
class DualCertificate:
    """Verdict of check_dual_certificate.

    Attributes:
        certified:        bool
        reason:           str - 'certified', 'zero', 'off-support', 'singular'
                          or 'infeasible'
        max_off_support:  float - max_{k not in T} |(F^* eta)_k|, nan if unset
    """

    certified:       bool
    reason:          str
    max_off_support: float = float("nan")


##    <(''<)  <( ' ' )>  (>'')>
# AFFINE PROJECTION
##    <(''<)  <( ' ' )>  (>'')>

def _real_stack(matrix, samples):
    return (np.vstack([matrix.real, matrix.imag]),
            np.concatenate([samples.real, samples.imag]))


class AffineProjector:
    """Exact projection onto {d : F d = f}.

    Complex mode caches a Cholesky factor of F F^*; real mode caches an
    orthonormal basis of the row space of the stacked real system and one
    particular solution.

    Raises:
        SingularSystemError:    F F^* singular (complex mode)
        InfeasibleProblemError: f outside the range (real mode)
    """

    def __init__(self, op, samples, real_mode=False):
        self.op        = op
        self.samples   = samples
        self.real_mode = real_mode

        matrix = op.dense()
        if real_mode:
            self._init_real(matrix)
        else:
            self._init_complex(matrix)

    def _init_complex(self, matrix):
        gram = matrix @ matrix.conj().T
        try:
            factor, lower = scipy.linalg.cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as e:
            raise SingularSystemError(
                "F F^* is not positive definite; the sampling set has repeated points") from e

        pivots = np.abs(np.diag(factor)) ** 2
        if pivots.min() < CONFIG["bp_singular_pivot"] * pivots.max():
            raise SingularSystemError(
                f"F F^* is numerically singular (pivot ratio {pivots.min() / pivots.max():.2e})")
        self._cho = (factor, lower)

    def _init_real(self, matrix):
        stacked, rhs = _real_stack(matrix, self.samples)
        particular, *_ = scipy.linalg.lstsq(stacked, rhs)
        miss = float(np.linalg.norm(stacked @ particular - rhs))
        if miss > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
            raise InfeasibleProblemError(
                f"samples are not reachable with real coefficients (residual {miss:.3e})")
        self._basis      = scipy.linalg.orth(stacked.T)
        self._particular = particular

    def project(self, d):
        if self.real_mode:
            shift = d - self._particular
            return d - self._basis @ (self._basis.T @ shift)
        mismatch = self.op.apply(d) - self.samples
        return d - self.op.adjoint_apply(scipy.linalg.cho_solve(self._cho, mismatch))

    def residual(self, d):
        return float(np.linalg.norm(self.op.apply(d) - self.samples))


def _soft_threshold(z, step, real_mode):
    """Proximal map of step * ||.||_1 (complex modulus or real absolute value)."""
    if real_mode:
        return np.sign(z) * np.maximum(np.abs(z) - step, 0.0)
    magnitude = np.abs(z)
    scale = np.maximum(1.0 - step / np.maximum(magnitude, np.finfo(float).tiny), 0.0)
    return z * scale


##    <(''<)  <( ' ' )>  (>'')>
# SPLITTING SOLVER
##    <(''<)  <( ' ' )>  (>'')>

def _dual_lower_bound(x, z, step):
    """Lower bound on the l1 optimum from the splitting state.

    z - x lies in the row space of the constraints, so u = (x - z) / step is
    F^* w for some w and, scaled into the unit max-norm ball, a feasible dual
    point with value Re <u, x>.
    """
    u = (x - z) / step
    peak = float(np.max(np.abs(u))) if u.size else 0.0
    return float(np.real(np.vdot(u, x))) / max(1.0, peak)


def solve_bp(problem, feas_tol=None, gap_tol=None, max_iter=None):
    """Basis Pursuit by Douglas-Rachford splitting.

    Starts from z = 0 and iterates x = P(z), y = soft(2x - z), z += y - x with
    P the exact affine projection. Every x is feasible up to rounding and is
    what gets returned. The run converges once ||F x - f|| <= feas_tol, the
    fixed-point residual ||y - x|| <= gap_tol * ||x|| and the duality gap
    ||x||_1 - Re <u, x> <= gap_tol * max(1, ||x||_1).

    Args:
        problem:  BPProblem
        feas_tol: float or None - defaults to bp_feas_rel_tol * ||f||
        gap_tol:  float or None - defaults to CONFIG['bp_gap_tol']
        max_iter: int or None - defaults to bp_max_iter_factor * D

    Returns:
        BPSolution - converged=False when max_iter is spent

    Raises:
        SingularSystemError:    complex mode with singular F F^*
        InfeasibleProblemError: real mode with unreachable samples
    """
    op, f, real_mode = problem.op, problem.samples, problem.real_mode
    f_norm   = float(np.linalg.norm(f))
    feas_tol = CONFIG["bp_feas_rel_tol"] * f_norm if feas_tol is None else feas_tol
    gap_tol  = CONFIG["bp_gap_tol"] if gap_tol is None else gap_tol
    max_iter = CONFIG["bp_max_iter_factor"] * op.cols if max_iter is None else max_iter
    step     = CONFIG["bp_step"]

    dtype = np.float64 if real_mode else np.complex128
    if f_norm == 0.0:
        zero = np.zeros(op.cols, dtype=dtype)
        return BPSolution(zero.astype(np.complex128), 0.0, 0.0, 0, True)

    projector = AffineProjector(op, f, real_mode)

    z = np.zeros(op.cols, dtype=dtype)
    x = projector.project(z)
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        x = projector.project(z)
        if real_mode:
            x = x.real
        y = _soft_threshold(2.0 * x - z, step, real_mode)
        fixed_point = float(np.linalg.norm(y - x))
        x_norm = float(np.linalg.norm(x))
        if fixed_point <= gap_tol * max(x_norm, np.finfo(float).tiny):
            objective = float(np.sum(np.abs(x)))
            gap = objective - _dual_lower_bound(x, z, step)
            if gap <= gap_tol * max(1.0, objective) and projector.residual(x) <= feas_tol:
                converged = True
                break
        z = z + y - x

    residual = projector.residual(x)
    if not converged:
        logger.warning("Basis Pursuit did not converge in %d iterations "
                       "(constraint residual %.3e)", iteration, residual)
    else:
        logger.debug("Basis Pursuit converged in %d iterations", iteration)

    return BPSolution(
        coefficients=np.asarray(x, dtype=np.complex128),
        objective=float(np.sum(np.abs(x))),
        constraint_residual=residual,
        iterations=iteration,
        converged=converged,
    )


##    <(''<)  <( ' ' )>  (>'')>
# DEBIASING
##    <(''<)  <( ' ' )>  (>'')>

def detected_support(coefficients, rel_tol=None):
    """{k : |d_k| > rel_tol * max |d|}."""
    rel_tol = CONFIG["bp_support_rel_tol"] if rel_tol is None else rel_tol
    magnitude = np.abs(np.asarray(coefficients))
    peak = magnitude.max() if magnitude.size else 0.0
    if peak == 0.0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(magnitude > rel_tol * peak)


def debias(op, coefficients, samples, real_mode=False, rel_tol=None):
    """Least-squares refit of the samples on the detected support.

    Supports larger than N are returned unchanged.

    Returns:
        np.ndarray length D of complex
    """
    support = detected_support(coefficients, rel_tol)
    out = np.zeros(op.cols, dtype=np.complex128)
    if support.size == 0:
        return out
    if support.size > op.rows:
        return np.asarray(coefficients, dtype=np.complex128).copy()

    sub = op.restrict(support)
    samples = np.asarray(samples, dtype=np.complex128)
    if real_mode:
        stacked, rhs = _real_stack(sub.matrix, samples)
        values, *_ = scipy.linalg.lstsq(stacked, rhs)
    else:
        values = ls_dense(sub, samples)
    out[sub.support] = values
    return out


##    <(''<)  <( ' ' )>  (>'')>
# DUAL CERTIFICATE
##    <(''<)  <( ' ' )>  (>'')>

def check_dual_certificate(op, candidate, samples, feas_tol=1e-10, margin=1e-8):
    """Certify a candidate as the unique l1 minimizer.

    With T the support of the candidate, eta = F_TX (F_TX^* F_TX)^{-1} sgn(c_T)
    satisfies (F^* eta)_T = sgn(c_T). The candidate is certified when F_TX is
    injective and |(F^* eta)_k| < 1 - margin for every k outside T.

    Args:
        op:        LinearMeasurement
        candidate: np.ndarray length D
        samples:   np.ndarray length N
        feas_tol:  float - relative feasibility required of the candidate
        margin:    float - strict margin below 1 off the support

    Returns:
        DualCertificate
    """
    candidate = np.asarray(candidate, dtype=np.complex128).ravel()
    samples   = np.asarray(samples, dtype=np.complex128).ravel()
    if candidate.size != op.cols:
        raise DimensionMismatchError(
            f"candidate has length {candidate.size}, expected D = {op.cols}")

    scale = max(1.0, float(np.linalg.norm(samples)))
    if np.linalg.norm(op.apply(candidate) - samples) > feas_tol * scale:
        return DualCertificate(False, "infeasible")

    support = np.flatnonzero(candidate)
    if support.size == 0:
        return DualCertificate(True, "zero", 0.0)
    if support.size > op.rows:
        return DualCertificate(False, "singular")

    sub = op.restrict(support)
    gram = sub.matrix.conj().T @ sub.matrix
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError:
        return DualCertificate(False, "singular")
    pivots = np.abs(np.diag(factor[0])) ** 2
    if pivots.min() < CONFIG["bp_singular_pivot"] * pivots.max():
        return DualCertificate(False, "singular")

    signs = candidate[support] / np.abs(candidate[support])
    eta = sub.matrix @ scipy.linalg.cho_solve(factor, signs)
    correlations = np.abs(op.adjoint_apply(eta))

    off = np.ones(op.cols, dtype=bool)
    off[support] = False
    worst = float(correlations[off].max()) if off.any() else 0.0

    if worst < 1.0 - margin:
        return DualCertificate(True, "certified", worst)
    return DualCertificate(False, "off-support", worst)


##    <(''<)  <( ' ' )>  (>'')>
# LINEAR PROGRAM ORACLE
##    <(''<)  <( ' ' )>  (>'')>

def solve_bp_real_lp_check(problem, max_iter=None):
    """Real-mode Basis Pursuit as a split-variable linear program.

    d = u - v with u, v >= 0, minimize sum(u) + sum(v) subject to the stacked
    real constraints, solved by HiGHS dual simplex. Dependent rows are removed
    beforehand by projecting onto an orthonormal basis of the column space.

    Args:
        problem:  BPProblem (treated as real mode)
        max_iter: int or None - simplex iteration guard

    Returns:
        BPSolution

    Raises:
        SupportError:           D above CONFIG['lp_max_dimension']
        InfeasibleProblemError: samples unreachable with real coefficients
        CyclingGuardError:      iteration guard exceeded
    """
    op, f = problem.op, problem.samples
    if op.cols > CONFIG["lp_max_dimension"]:
        raise SupportError(
            f"the LP oracle is limited to D <= {CONFIG['lp_max_dimension']}, got {op.cols}")
    max_iter = CONFIG["lp_max_iter"] if max_iter is None else max_iter

    stacked, rhs = _real_stack(op.dense(), f)
    particular, *_ = scipy.linalg.lstsq(stacked, rhs)
    miss = float(np.linalg.norm(stacked @ particular - rhs))
    if miss > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
        raise InfeasibleProblemError(
            f"samples are not reachable with real coefficients (residual {miss:.3e})")

    basis = scipy.linalg.orth(stacked)
    reduced_matrix = basis.T @ stacked
    reduced_rhs    = basis.T @ rhs

    d = op.cols
    result = linprog(
        c=np.ones(2 * d),
        A_eq=np.hstack([reduced_matrix, -reduced_matrix]),
        b_eq=reduced_rhs,
        bounds=[(0, None)] * (2 * d),
        method="highs-ds",
        options={"maxiter": max_iter},
    )

    if result.status == 1:
        raise CyclingGuardError(f"simplex iteration guard of {max_iter} exceeded")
    if result.status == 2:
        raise InfeasibleProblemError("linear program reported infeasibility")
    if result.status != 0:
        raise SingularSystemError(f"linear program failed: {result.message}")

    solution = result.x[:d] - result.x[d:]
    return BPSolution(
        coefficients=solution.astype(np.complex128),
        objective=float(np.sum(np.abs(solution))),
        constraint_residual=float(np.linalg.norm(op.apply(solution) - f)),
        iterations=int(getattr(result, "nit", 0)),
        converged=True,
    )


# U S A G I
# from sparsetrig.core.basis_pursuit import BPProblem, solve_bp, debias
# sol = solve_bp(BPProblem(op, f))
# d = debias(op, sol.coefficients, f)
