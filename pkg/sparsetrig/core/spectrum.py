"""
core/spectrum.py

Frequency sets, sparse coefficient vectors and trigonometric polynomials.

Responsibilities:
    - FrequencySet: the index set Gamma in Z^d, canonically ordered
    - SparseCoefficients: complex coefficients supported on T within Gamma
    - TrigPolynomial: f(x) = sum_{k in T} c_k exp(i k.x)
    - Random sparse coefficient draws (uniform support, gaussian or unimodular values)

Canonical order is lexicographic on the integer components; every column
index elsewhere in the package is a position in this order.

All types are immutable after construction (arrays are flagged read-only).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sparsetrig.core.errors import DimensionMismatchError, SupportError

logger = logging.getLogger(__name__)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# COEFFICIENT STYLES
# gaussian      - real and imaginary parts each N(0, 1)
# unimodular    - modulus one, phase uniform on [0, 2pi)
# real-gaussian - real N(0, 1) values, for real-mode Basis Pursuit
# (つ -' _ '- )つ    (つ -' _ '- )つ

STYLE_GAUSSIAN      = "gaussian"
STYLE_UNIMODULAR    = "unimodular"
STYLE_REAL_GAUSSIAN = "real-gaussian"

COEFFICIENT_STYLES = (STYLE_GAUSSIAN, STYLE_UNIMODULAR, STYLE_REAL_GAUSSIAN)

_STYLE_ALIASES = {
    "complex-gaussian": STYLE_GAUSSIAN,
    "unimodular-phase": STYLE_UNIMODULAR,
    "real":             STYLE_REAL_GAUSSIAN,
}


def _frozen(array):
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


##    <(''<)  <( ' ' )>  (>'')>
# FREQUENCY SET
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Ordered set Gamma of integer frequencies in Z^d.

    Attributes:
        dimension:   int - ambient dimension d >= 1
        frequencies: np.ndarray shape (D, d), int64, lexicographically sorted
    """

    dimension:   int
    frequencies: np.ndarray = field(repr=False)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=np.int64)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1)
        if freqs.ndim != 2 or freqs.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"frequencies must have shape (D, {self.dimension}), got {freqs.shape}")
        if self.dimension < 1:
            raise DimensionMismatchError("dimension must be >= 1")
        if freqs.shape[0] < 1:
            raise SupportError("a frequency set needs at least one frequency")

        # Lexicographic order: lexsort keys run last-to-first
        order = np.lexsort(freqs.T[::-1])
        freqs = freqs[order]
        if freqs.shape[0] > 1 and np.any(np.all(freqs[1:] == freqs[:-1], axis=1)):
            raise SupportError("frequency set contains duplicate frequencies")

        object.__setattr__(self, "frequencies", _frozen(freqs))

    # (つ -' _ '- )つ    (つ -' _ '- )つ
    # CANONICAL CONSTRUCTORS
    # (つ -' _ '- )つ    (つ -' _ '- )つ

    @classmethod
    def cube(cls, q, dimension=1):
        """Gamma = {-q, ..., q}^d, so D = (2q+1)^d."""
        if q < 0:
            raise SupportError("cube order q must be >= 0")
        axis  = np.arange(-q, q + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * dimension), indexing="ij")
        freqs = np.stack([g.ravel() for g in grids], axis=1)
        return cls(dimension, freqs)

    @classmethod
    def centered(cls, size):
        """Univariate Gamma = {-D/2, ..., D/2 - 1} for even D.

        Odd D falls back to {-(D-1)/2, ..., (D-1)/2}, the q-cube with D = 2q+1.
        """
        if size < 1:
            raise SupportError("frequency set size must be >= 1")
        if size % 2 == 0:
            return cls(1, np.arange(-size // 2, size // 2, dtype=np.int64))
        return cls.cube((size - 1) // 2, 1)

    @property
    def size(self):
        """D = |Gamma|."""
        return self.frequencies.shape[0]

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, FrequencySet):
            return NotImplemented
        return (self.dimension == other.dimension
                and np.array_equal(self.frequencies, other.frequencies))

    def __hash__(self):
        return hash((self.dimension, self.frequencies.tobytes()))

    def index_of(self, frequency):
        """Canonical position of a frequency.

        Raises:
            SupportError: frequency not in Gamma
        """
        target = np.atleast_1d(np.asarray(frequency, dtype=np.int64))
        if target.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"frequency must have {self.dimension} components")
        hits = np.flatnonzero(np.all(self.frequencies == target, axis=1))
        if hits.size == 0:
            raise SupportError(f"frequency {target.tolist()} is not in the set")
        return int(hits[0])

    def fits_grid(self, m):
        """True when Gamma maps injectively into Z_m^d (residues mod m distinct)."""
        if m < 2:
            return False
        residues = np.mod(self.frequencies, m)
        return np.unique(residues, axis=0).shape[0] == self.size

    def shifted(self, offset):
        """Gamma + k0 for an integer offset vector k0."""
        offset = np.atleast_1d(np.asarray(offset, dtype=np.int64))
        if offset.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"offset must have {self.dimension} components")
        return FrequencySet(self.dimension, self.frequencies + offset)


##    <(''<)  <( ' ' )>  (>'')>
# SPARSE COEFFICIENTS
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True, eq=False)
class SparseCoefficients:
    """Complex coefficients supported on T within a FrequencySet.

    Attributes:
        base:    FrequencySet - the ambient Gamma
        support: np.ndarray of int - sorted canonical indices of T, |T| = M <= D
        values:  np.ndarray of complex - c_k for k in T, all nonzero
    """

    base:    FrequencySet
    support: np.ndarray
    values:  np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).ravel()
        values  = np.asarray(self.values, dtype=np.complex128).ravel()

        if support.shape != values.shape:
            raise DimensionMismatchError(
                f"support has {support.size} entries but values has {values.size}")
        if support.size > self.base.size:
            raise SupportError(f"support size {support.size} exceeds D = {self.base.size}")
        if support.size and (support.min() < 0 or support.max() >= self.base.size):
            raise SupportError("support index outside the frequency set")
        if np.unique(support).size != support.size:
            raise SupportError("support contains repeated indices")
        if np.any(values == 0):
            raise SupportError("every coefficient on the support must be nonzero")

        order = np.argsort(support, kind="stable")
        object.__setattr__(self, "support", _frozen(support[order]))
        object.__setattr__(self, "values", _frozen(values[order]))

    @classmethod
    def from_dense(cls, base, dense, threshold=0.0):
        """Build from a length-D vector, keeping entries with |c_k| > threshold."""
        dense = np.asarray(dense, dtype=np.complex128).ravel()
        if dense.size != base.size:
            raise DimensionMismatchError(
                f"dense vector has length {dense.size}, expected {base.size}")
        support = np.flatnonzero(np.abs(dense) > threshold)
        return cls(base, support, dense[support])

    @classmethod
    def zero(cls, base):
        """The empty-support (M = 0) coefficient vector."""
        return cls(base, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128))

    @property
    def sparsity(self):
        """M = |T|."""
        return self.support.size

    @property
    def support_frequencies(self):
        """Frequencies k in T, shape (M, d)."""
        return self.base.frequencies[self.support]

    def dense(self):
        """Length-D complex vector, zero off T."""
        out = np.zeros(self.base.size, dtype=np.complex128)
        out[self.support] = self.values
        return out

    def dynamic_range(self):
        """R = max_{k in T} |c_k| / min_{k in T} |c_k|."""
        return dynamic_range(self)

    def scaled(self, alpha):
        """alpha * c for a nonzero complex scalar."""
        if alpha == 0:
            raise SupportError("scaling by zero empties the support")
        return SparseCoefficients(self.base, self.support, alpha * self.values)


##    <(''<)  <( ' ' )>  (>'')>
# TRIGONOMETRIC POLYNOMIAL
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True)
class TrigPolynomial:
    """f(x) = sum_{k in T} c_k exp(i k.x) on [0, 2pi]^d."""

    coefficients: SparseCoefficients

    @property
    def dimension(self):
        return self.coefficients.base.dimension

    def __call__(self, x):
        return evaluate(self, x)

    def shift(self, offset):
        """Same coefficients on Gamma + k0; evaluate picks up exp(i k0.x)."""
        c = self.coefficients
        return TrigPolynomial(SparseCoefficients(c.base.shifted(offset), c.support, c.values))


def evaluate(poly, x):
    """Evaluate a trigonometric polynomial by direct summation.

    Args:
        poly: TrigPolynomial
        x:    array-like - one point of shape (d,) or points of shape (n, d);
              for d = 1 a flat array of n points is also accepted

    Returns:
        complex for a single point, np.ndarray of complex shape (n,) otherwise

    Raises:
        DimensionMismatchError: point dimension differs from d
    """
    d = poly.dimension
    points = np.asarray(x, dtype=np.float64)

    if d == 1 and points.ndim <= 1:
        single = points.ndim == 0
        points = points.reshape(-1, 1)
    else:
        single = points.ndim == 1
        points = np.atleast_2d(points)

    if points.shape[1] != d:
        raise DimensionMismatchError(
            f"point dimension {points.shape[1]} does not match frequency dimension {d}")

    c = poly.coefficients
    if c.sparsity == 0:
        values = np.zeros(points.shape[0], dtype=np.complex128)
    else:
        phases = points @ c.support_frequencies.T
        values = np.exp(1j * phases) @ c.values

    return complex(values[0]) if single else values


def dynamic_range(coefficients):
    """R = max|c_k| / min|c_k| over the support.

    Raises:
        SupportError: empty support
    """
    if coefficients.sparsity == 0:
        raise SupportError("dynamic range of an empty support is undefined")
    moduli = np.abs(coefficients.values)
    return float(moduli.max() / moduli.min())


##    <(''<)  <( ' ' )>  (>'')>
# RANDOM SPARSE COEFFICIENTS
##    <(''<)  <( ' ' )>  (>'')>

def random_support(size, sparsity, rng):
    """Uniform size-M subset of range(D) by a partial Fisher-Yates shuffle.

    Args:
        size:     int - D
        sparsity: int - M, 0 <= M <= D
        rng:      np.random.Generator

    Returns:
        np.ndarray of int - sorted subset
    """
    if not 0 <= sparsity <= size:
        raise SupportError(f"sparsity {sparsity} must lie in [0, {size}]")
    pool = np.arange(size, dtype=np.int64)
    for i in range(sparsity):
        j = int(rng.integers(i, size))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:sparsity])


def normalize_style(style):
    """Map accepted style spellings onto COEFFICIENT_STYLES."""
    style = _STYLE_ALIASES.get(style, style)
    if style not in COEFFICIENT_STYLES:
        raise SupportError(f"unknown coefficient style {style!r}")
    return style


def random_sparse_coefficients(base, sparsity, style, rng):
    """Draw a random M-sparse coefficient vector on base.

    Args:
        base:     FrequencySet
        sparsity: int - M, 0 <= M <= D
        style:    str - 'gaussian', 'unimodular' or 'real-gaussian'
        rng:      np.random.Generator

    Returns:
        SparseCoefficients

    Raises:
        SupportError: M > D or unknown style
    """
    style = normalize_style(style)
    if sparsity > base.size:
        raise SupportError(f"sparsity {sparsity} exceeds D = {base.size}")

    support = random_support(base.size, sparsity, rng)

    if style == STYLE_GAUSSIAN:
        values = rng.standard_normal(sparsity) + 1j * rng.standard_normal(sparsity)
    elif style == STYLE_UNIMODULAR:
        values = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, sparsity))
    else:
        values = rng.standard_normal(sparsity).astype(np.complex128)

    return SparseCoefficients(base, support, values)


# U S A G I
# from sparsetrig.core.spectrum import FrequencySet, random_sparse_coefficients, TrigPolynomial
# base = FrequencySet.centered(100)
# c = random_sparse_coefficients(base, 5, "gaussian", np.random.default_rng(0))
# TrigPolynomial(c)(np.pi / 3)
