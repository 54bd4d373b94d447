"""
core/least_squares.py

Least-squares backends for the greedy solvers.

Responsibilities:
    - QRFactorization: thin QR of F_TX grown one column at a time
      (Gram-Schmidt with one reorthogonalization pass, O(N s) per column)
    - ls_qr_update: grow the factorization and return the new solution
    - ls_iterative: LSQR on F_TX, explicit or through the parent operator

LSQR runs on the real-stacked form of the complex system,
[Re A, -Im A; Im A, Re A] [Re x; Im x] = [Re f; Im f], so the scipy solver
only ever sees real arithmetic.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, lsqr

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import DegenerateSelectionError, DimensionMismatchError

logger = logging.getLogger(__name__)


##    <(''<)  <( ' ' )>  (>'')>
# INCREMENTAL QR
##    <(''<)  <( ' ' )>  (>'')>

class QRFactorization:
    """Thin QR factorization A = Q R of a column-grown N x s matrix.

    Attributes:
        q:       np.ndarray shape (N, s) - orthonormal columns
        r:       np.ndarray shape (s, s) - upper triangular, positive diagonal
        indices: list of int - canonical column index of each factor column
    """

    def __init__(self, rows, degenerate_tol=None):
        self.q       = np.empty((rows, 0), dtype=np.complex128)
        self.r       = np.empty((0, 0), dtype=np.complex128)
        self.indices = []
        self.degenerate_tol = (CONFIG["qr_degenerate_tol"]
                               if degenerate_tol is None else degenerate_tol)

    @property
    def rows(self):
        return self.q.shape[0]

    @property
    def size(self):
        """Number of columns s."""
        return self.q.shape[1]

    def append(self, column, index=None):
        """Add one column, updating Q and R in O(N s).

        Args:
            column: np.ndarray shape (N,)
            index:  int or None - canonical index, kept for error reports

        Raises:
            DegenerateSelectionError: orthogonalized norm below
                degenerate_tol * ||column||
        """
        column = np.asarray(column, dtype=np.complex128).ravel()
        if column.size != self.rows:
            raise DimensionMismatchError(
                f"column has length {column.size}, expected {self.rows}")

        v = column.copy()
        h = self.q.conj().T @ v
        v -= self.q @ h
        # Second pass restores orthogonality lost to cancellation
        h2 = self.q.conj().T @ v
        v -= self.q @ h2
        h += h2

        norm = float(np.linalg.norm(v))
        if norm < self.degenerate_tol * max(float(np.linalg.norm(column)), np.finfo(float).tiny):
            raise DegenerateSelectionError(index, self.size + 1, norm)

        s = self.size
        r = np.zeros((s + 1, s + 1), dtype=np.complex128)
        r[:s, :s] = self.r
        r[:s, s]  = h
        r[s, s]   = norm

        self.r = r
        self.q = np.column_stack([self.q, v / norm])
        self.indices.append(index)

    def solve(self, samples):
        """argmin_d ||A d - f||_2 = R^{-1} Q^* f."""
        if self.size == 0:
            return np.empty(0, dtype=np.complex128)
        qtf = self.q.conj().T @ samples
        return scipy.linalg.solve_triangular(self.r, qtf, lower=False)

    def residual(self, samples):
        """f - Q Q^* f, orthogonal to every factored column."""
        return samples - self.q @ (self.q.conj().T @ samples)


def ls_qr_update(column, factorization, samples, index=None):
    """Grow a QR factorization by one column and re-solve.

    Args:
        column:        np.ndarray shape (N,) - the new column phi_k
        factorization: QRFactorization or None - factorization of the first
                       s-1 columns; None starts a new one
        samples:       np.ndarray shape (N,) - f
        index:         int or None - canonical index of the new column

    Returns:
        (QRFactorization, np.ndarray) - the updated factorization and the
        least-squares solution on all s columns, in insertion order
    """
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if factorization is None:
        factorization = QRFactorization(samples.size)
    factorization.append(column, index=index)
    return factorization, factorization.solve(samples)


##    <(''<)  <( ' ' )>  (>'')>
# ITERATIVE LEAST SQUARES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass
class IterativeSolution:
    """Result of ls_iterative.

    Attributes:
        solution:        np.ndarray of complex, length M
        iterations:      int - total LSQR iterations
        converged:       bool - normal-equation residual met the tolerance
        normal_residual: float - ||F^*(f - F d)||_2
    """

    solution:        np.ndarray
    iterations:      int
    converged:       bool
    normal_residual: float


def _real_stacked(sub, implicit):
    rows, cols = sub.shape
    forward = sub.apply_implicit   if implicit else sub.apply
    adjoint = sub.adjoint_implicit if implicit else sub.adjoint_apply

    def matvec(v):
        v = np.asarray(v, dtype=np.float64).ravel()
        out = forward(v[:cols] + 1j * v[cols:])
        return np.concatenate([out.real, out.imag])

    def rmatvec(w):
        w = np.asarray(w, dtype=np.float64).ravel()
        out = adjoint(w[:rows] + 1j * w[rows:])
        return np.concatenate([out.real, out.imag])

    return LinearOperator((2 * rows, 2 * cols), matvec=matvec, rmatvec=rmatvec,
                          dtype=np.float64)


def ls_iterative(sub, samples, tol=None, max_iter=None, implicit=False):
    """Solve min ||F_TX d - f||_2 with LSQR.

    LSQR is restarted from its last iterate until the normal-equation residual
    ||F_TX^*(f - F_TX d)|| falls to tol * ||F_TX^* f|| or max_iter is spent.

    Args:
        sub:      SupportOperator
        samples:  np.ndarray shape (N,)
        tol:      float > 0 - defaults to CONFIG['lsqr_tol']
        max_iter: int - defaults to CONFIG['lsqr_max_iter']
        implicit: bool - apply F_TX through the parent operator

    Returns:
        IterativeSolution - best iterate, flagged unconverged on a spent budget
    """
    tol      = CONFIG["lsqr_tol"] if tol is None else tol
    max_iter = CONFIG["lsqr_max_iter"] if max_iter is None else max_iter
    if tol <= 0:
        raise DimensionMismatchError("iterative least squares needs tol > 0")

    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if samples.size != sub.shape[0]:
        raise DimensionMismatchError(
            f"sample vector has length {samples.size}, expected {sub.shape[0]}")

    m = sub.size
    adjoint = sub.adjoint_implicit if implicit else sub.adjoint_apply
    forward = sub.apply_implicit   if implicit else sub.apply

    target = float(np.linalg.norm(adjoint(samples)))
    if target == 0.0:
        return IterativeSolution(np.zeros(m, dtype=np.complex128), 0, True, 0.0)

    stacked = _real_stacked(sub, implicit)
    rhs     = np.concatenate([samples.real, samples.imag])
    x       = np.zeros(2 * m)
    total   = 0
    converged = False
    normal  = np.inf

    while total < max_iter:
        out = lsqr(stacked, rhs, atol=tol, btol=tol, conlim=1e12,
                   iter_lim=max_iter - total, x0=x)
        x, itn = out[0], int(out[2])
        total += itn

        d = x[:m] + 1j * x[m:]
        normal = float(np.linalg.norm(adjoint(samples - forward(d))))
        if normal <= tol * target:
            converged = True
            break
        if itn == 0:
            break

    d = x[:m] + 1j * x[m:]
    if not converged:
        logger.warning("LSQR stopped after %d iterations, normal residual %.3e > %.3e",
                       total, normal, tol * target)
    else:
        logger.debug("LSQR converged in %d iterations", total)

    return IterativeSolution(d, total, converged, normal)


def ls_dense(sub, samples):
    """Reference dense least squares on F_TX."""
    solution, *_ = scipy.linalg.lstsq(sub.matrix, np.asarray(samples, dtype=np.complex128))
    return solution


# U S A G I
# from sparsetrig.core.least_squares import ls_qr_update, ls_iterative
# fact, d = ls_qr_update(op.columns([k])[:, 0], None, f, index=k)
# sol = ls_iterative(op.restrict([3, 7]), f, tol=1e-10)
