"""
core/measurement.py

Implicit measurement operators F_X with entries exp(i k.x_j).

Responsibilities:
    - MeasurementOperator: apply / adjoint / column access for a SamplingSet
      and FrequencySet, with an FFT fast path for grid-aligned samples
    - GaussianOperator: the dense N(0, 1/N) ensemble behind the same interface
    - SupportOperator: the column restriction F_TX and its Gram matrix
    - scipy LinearOperator views for the iterative solvers

Fast path selection:
    fft-subset - discrete(m, d) samples and Gamma injective into Z_m^d.
                 apply = zero padded m^d inverse FFT, then row selection;
                 adjoint = accumulate samples onto the grid, then forward FFT.
    direct     - nonequispaced sum over all (j, k), in column chunks.

Under the discrete model every phase is the integer k.g_j reduced mod m and
looked up in a table of m-th roots of unity, so entries are exact roots.
"""

import logging
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import DimensionMismatchError, SupportError
from sparsetrig.core.sampling import MODEL_DISCRETE, MODEL_GAUSSIAN, SamplingModel

logger = logging.getLogger(__name__)


FAST_PATH_FFT    = "fft-subset"
FAST_PATH_DIRECT = "direct"
FAST_PATH_DENSE  = "dense"

# Upper bound on N * chunk entries materialized by the direct path
_DIRECT_CHUNK_ENTRIES = 1 << 22


def _as_vector(values, length, what):
    vec = np.asarray(values, dtype=np.complex128).ravel()
    if vec.size != length:
        raise DimensionMismatchError(f"{what} has length {vec.size}, expected {length}")
    return vec


##    <(''<)  <( ' ' )>  (>'')>
# SHARED OPERATOR INTERFACE
##    <(''<)  <( ' ' )>  (>'')>

class LinearMeasurement:
    """Common interface of F_X and the gaussian ensemble.

    Subclasses provide apply, adjoint_apply, columns and column_norms.
    """

    fast_path = FAST_PATH_DIRECT

    @property
    def rows(self):
        """N."""
        raise NotImplementedError

    @property
    def cols(self):
        """D."""
        raise NotImplementedError

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def is_fourier(self):
        return False

    def apply(self, coefficients):
        raise NotImplementedError

    def adjoint_apply(self, residual):
        raise NotImplementedError

    def columns(self, indices):
        raise NotImplementedError

    @property
    def column_norms(self):
        raise NotImplementedError

    def dense(self):
        """The full N x D matrix. Only sensible at desk scale."""
        return self.columns(np.arange(self.cols))

    def restrict(self, support):
        """F_TX for a support set T."""
        return SupportOperator(self, support)

    def as_linear_operator(self):
        """scipy LinearOperator view (matvec = apply, rmatvec = adjoint)."""
        return LinearOperator(
            self.shape,
            matvec=self.apply,
            rmatvec=self.adjoint_apply,
            dtype=np.complex128,
        )


##    <(''<)  <( ' ' )>  (>'')>
# FOURIER OPERATOR
##    <(''<)  <( ' ' )>  (>'')>

class MeasurementOperator(LinearMeasurement):
    """F_X for a sampling set X and frequency set Gamma.

    Attributes:
        sampling:    SamplingSet
        frequencies: FrequencySet
        fast_path:   str - 'fft-subset' or 'direct'
    """

    def __init__(self, sampling, frequencies):
        if sampling.model.kind == MODEL_GAUSSIAN:
            raise DimensionMismatchError("use GaussianOperator for the gaussian ensemble")
        if sampling.dimension != frequencies.dimension:
            raise DimensionMismatchError(
                f"sampling dimension {sampling.dimension} does not match "
                f"frequency dimension {frequencies.dimension}")

        self.sampling    = sampling
        self.frequencies = frequencies

        model = sampling.model
        self._grid = model.grid if model.kind == MODEL_DISCRETE else None

        if self._grid is not None and frequencies.fits_grid(self._grid):
            self.fast_path = FAST_PATH_FFT
        else:
            self.fast_path = FAST_PATH_DIRECT

        if self._grid is not None:
            self._residues = np.mod(frequencies.frequencies, self._grid)
            self._roots    = np.exp(2j * np.pi * np.arange(self._grid) / self._grid)

        logger.debug(
            "MeasurementOperator N=%d D=%d model=%s path=%s",
            self.rows, self.cols, model.label, self.fast_path)

    @property
    def rows(self):
        return self.sampling.size

    @property
    def cols(self):
        return self.frequencies.size

    @property
    def is_fourier(self):
        return True

    @property
    def grid(self):
        """m under the discrete model, else None."""
        return self._grid

    @property
    def column_norms(self):
        return np.full(self.cols, np.sqrt(self.rows))

    # (つ -' _ '- )つ    (つ -' _ '- )つ
    # ENTRY BLOCKS
    # (つ -' _ '- )つ    (つ -' _ '- )つ

    def columns(self, indices):
        """Explicit columns phi_k for canonical indices, shape (N, len(indices))."""
        indices = np.asarray(indices, dtype=np.int64).ravel()
        if indices.size and (indices.min() < 0 or indices.max() >= self.cols):
            raise SupportError("column index outside the frequency set")
        freqs = self.frequencies.frequencies[indices]

        if self._grid is not None:
            phases = np.mod(self.sampling.grid_indices @ freqs.T, self._grid)
            return self._roots[phases]
        return np.exp(1j * (self.sampling.points @ freqs.T))

    def _chunks(self):
        width = max(1, _DIRECT_CHUNK_ENTRIES // max(1, self.rows))
        for start in range(0, self.cols, width):
            yield np.arange(start, min(start + width, self.cols))

    # (つ -' _ '- )つ    (つ -' _ '- )つ
    # APPLY / ADJOINT
    # (つ -' _ '- )つ    (つ -' _ '- )つ

    def apply(self, coefficients):
        """Samples F_X c, length N."""
        c = _as_vector(coefficients, self.cols, "coefficient vector")

        if self.fast_path == FAST_PATH_FFT:
            d = self.frequencies.dimension
            spectrum = np.zeros((self._grid,) * d, dtype=np.complex128)
            spectrum[tuple(self._residues.T)] = c
            full = np.fft.ifftn(spectrum) * (self._grid ** d)
            return full[tuple(self.sampling.grid_indices.T)]

        out = np.zeros(self.rows, dtype=np.complex128)
        for chunk in self._chunks():
            out += self.columns(chunk) @ c[chunk]
        return out

    def adjoint_apply(self, residual):
        """Correlations F_X^* r, length D."""
        r = _as_vector(residual, self.rows, "sample vector")

        if self.fast_path == FAST_PATH_FFT:
            d = self.frequencies.dimension
            accumulated = np.zeros((self._grid,) * d, dtype=np.complex128)
            np.add.at(accumulated, tuple(self.sampling.grid_indices.T), r)
            full = np.fft.fftn(accumulated)
            return full[tuple(self._residues.T)]

        out = np.empty(self.cols, dtype=np.complex128)
        for chunk in self._chunks():
            out[chunk] = self.columns(chunk).conj().T @ r
        return out


##    <(''<)  <( ' ' )>  (>'')>
# GAUSSIAN ENSEMBLE
##    <(''<)  <( ' ' )>  (>'')>

class GaussianOperator(LinearMeasurement):
    """Dense real N x D matrix with i.i.d. N(0, 1/N) entries.

    Attributes:
        matrix:      np.ndarray shape (N, D)
        frequencies: FrequencySet or None - labels for the D columns
        model:       SamplingModel - gaussian(N, D)
    """

    fast_path = FAST_PATH_DENSE

    def __init__(self, matrix, frequencies=None, seed=None):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DimensionMismatchError("gaussian ensemble must be a 2-D matrix")
        if frequencies is not None and frequencies.size != matrix.shape[1]:
            raise DimensionMismatchError("frequency labels do not match the column count")
        matrix.setflags(write=False)
        self.matrix      = matrix
        self.frequencies = frequencies
        self.seed        = seed
        self.model       = SamplingModel.gaussian(*matrix.shape)

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]

    @cached_property
    def column_norms(self):
        return np.linalg.norm(self.matrix, axis=0)

    def columns(self, indices):
        indices = np.asarray(indices, dtype=np.int64).ravel()
        return self.matrix[:, indices].astype(np.complex128)

    def apply(self, coefficients):
        return self.matrix @ _as_vector(coefficients, self.cols, "coefficient vector")

    def adjoint_apply(self, residual):
        return self.matrix.T @ _as_vector(residual, self.rows, "sample vector")


##    <(''<)  <( ' ' )>  (>'')>
# SUPPORT RESTRICTION
##    <(''<)  <( ' ' )>  (>'')>

class SupportOperator:
    """F_TX: the parent columns indexed by T, in canonical order.

    Attributes:
        parent:  LinearMeasurement
        support: np.ndarray of int - sorted, unique, nonempty
    """

    def __init__(self, parent, support):
        support = np.unique(np.asarray(support, dtype=np.int64).ravel())
        if support.size == 0:
            raise SupportError("support operator needs a nonempty support")
        if support[0] < 0 or support[-1] >= parent.cols:
            raise SupportError("support index outside the frequency set")
        support.setflags(write=False)
        self.parent  = parent
        self.support = support

    @property
    def size(self):
        """M = |T|."""
        return self.support.size

    @property
    def shape(self):
        return (self.parent.rows, self.size)

    @cached_property
    def matrix(self):
        """Explicit N x M submatrix."""
        return self.parent.columns(self.support)

    def apply(self, values):
        return self.matrix @ _as_vector(values, self.size, "support vector")

    def adjoint_apply(self, residual):
        return self.matrix.conj().T @ _as_vector(residual, self.parent.rows, "sample vector")

    def apply_implicit(self, values):
        """F_TX d through the parent operator (FFT path when available)."""
        full = np.zeros(self.parent.cols, dtype=np.complex128)
        full[self.support] = _as_vector(values, self.size, "support vector")
        return self.parent.apply(full)

    def adjoint_implicit(self, residual):
        return self.parent.adjoint_apply(residual)[self.support]

    def gram(self):
        """F_TX^* F_TX, Hermitian, diagonal exactly N for Fourier columns.

        Raises:
            SupportError: M above CONFIG['gram_max_support']
        """
        if self.size > CONFIG["gram_max_support"]:
            raise SupportError(
                f"Gram matrices are only formed for M <= {CONFIG['gram_max_support']}")
        a = self.matrix
        g = a.conj().T @ a
        g = 0.5 * (g + g.conj().T)
        if self.parent.is_fourier:
            np.fill_diagonal(g, float(self.parent.rows))
        return g

    def as_linear_operator(self, implicit=False):
        """scipy LinearOperator view; implicit=True routes through the parent."""
        matvec  = self.apply_implicit   if implicit else self.apply
        rmatvec = self.adjoint_implicit if implicit else self.adjoint_apply
        return LinearOperator(self.shape, matvec=matvec, rmatvec=rmatvec, dtype=np.complex128)


##    <(''<)  <( ' ' )>  (>'')>
# MODULE-LEVEL OPERATIONS
##    <(''<)  <( ' ' )>  (>'')>

def build_operator(sampling, frequencies):
    """F_X for a sampling set and frequency set."""
    return MeasurementOperator(sampling, frequencies)


def apply(op, coefficients):
    """F_X c."""
    return op.apply(coefficients)


def adjoint_apply(op, residual):
    """F_X^* r."""
    return op.adjoint_apply(residual)


def gram_submatrix(sub):
    """F_TX^* F_TX for a SupportOperator."""
    return sub.gram()


# U S A G I
# from sparsetrig.core.measurement import build_operator
# op = build_operator(X, FrequencySet.centered(100))
# f = op.apply(c.dense()); corr = op.adjoint_apply(f)
