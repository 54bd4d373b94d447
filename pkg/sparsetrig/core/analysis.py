"""
core/analysis.py

Diagnostics for a concrete measurement operator and sample-count formulas.

Responsibilities:
    - coherence(): mu = N^{-1} max_{j != k} |<phi_j, phi_k>|, scanned over the
      difference set of Gamma instead of all column pairs
    - check_omp_uniform / check_thresh_uniform: coherence recovery predicates
    - gram_eigs(): extreme eigenvalues of N^{-1} F_TX^* F_TX
    - ric_bruteforce(): restricted isometry constants by subset enumeration
    - sample_bounds(), eigenvalue_band_samples(): sample counts, natural log
    - correlation_tail_bound(): tail of N^{-1}|<F_TX c, phi_j>| for j not in T

Fourier Gram entries only depend on the frequency difference k - k', so
the coherence scan evaluates one exponential sum per distinct difference.
Under the discrete model differences are taken mod m.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import BudgetExceededError, ConfigError, SupportError
from sparsetrig.core.sampling import MODEL_CONTINUOUS, MODEL_DISCRETE, SamplingModel
from sparsetrig.core.spectrum import FrequencySet

logger = logging.getLogger(__name__)


# Upper bound on (differences x samples) entries per exponential-sum block
_SUM_BLOCK_ENTRIES = 1 << 22


##    <(''<)  <( ' ' )>  (>'')>
# REPORT TYPES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True)
class CoherenceReport:
    """Coherence of a measurement operator.

    Attributes:
        mu:                      float in [0, 1]
        argmax_pair:             (int, int) - canonical indices attaining mu
        recovery_bound_sparsity: int - largest M with (2M - 1) mu < 1, capped at D
    """

    mu:                      float
    argmax_pair:             tuple
    recovery_bound_sparsity: int


@dataclass(frozen=True)
class EigBoundReport:
    """Extreme eigenvalues of N^{-1} F_TX^* F_TX.

    Attributes:
        lambda_min: float
        lambda_max: float
        delta:      float - max(1 - lambda_min, lambda_max - 1)
        method:     str - 'dense' or 'lanczos'
    """

    lambda_min: float
    lambda_max: float
    delta:      float
    method:     str = "dense"

    def within_band(self, delta):
        """Both extremes inside [1 - delta, 1 + delta]."""
        return self.lambda_min >= 1.0 - delta and self.lambda_max <= 1.0 + delta


@dataclass(frozen=True)
class RICReport:
    """Restricted isometry constants delta_1 .. delta_Mmax.

    Attributes:
        deltas:         tuple of float - deltas[M - 1] = delta_M, nondecreasing
        crt_sparsity:   int - M = floor(Mmax / 3) at which condition_crt is read
        condition_crt:  bool - delta_M + delta_2M + delta_3M < 1 (False when
                        crt_sparsity is 0)
        subsets:        int - number of supports visited
    """

    deltas:        tuple
    crt_sparsity:  int
    condition_crt: bool
    subsets:       int

    def delta(self, sparsity):
        return self.deltas[sparsity - 1]

    def crt_holds(self, sparsity):
        """delta_M + delta_2M + delta_3M < 1 for any M with 3M <= Mmax."""
        if sparsity < 1 or 3 * sparsity > len(self.deltas):
            raise SupportError(
                f"condition at M = {sparsity} needs delta up to {3 * sparsity}, "
                f"only {len(self.deltas)} available")
        return self.delta(sparsity) + self.delta(2 * sparsity) + self.delta(3 * sparsity) < 1.0


@dataclass(frozen=True)
class SampleBounds:
    """Sample counts N sufficient for recovery with probability 1 - eps.

    Attributes:
        thresholding:   int - ceil(17.89 M R^2 ln(4D/eps))
        omp:            int - ceil(32.62 M ln(8D/eps))
        coherence:      int - ceil(C (2M - 1)^2 ln(4D'/eps))
        sparse_solver:  None - the general bound has an unstated absolute constant
        difference_count: int - D'
        coherence_constant: float - C used for the coherence bound
        notes:          dict - formula per entry
    """

    thresholding:       int
    omp:                int
    coherence:          int
    sparse_solver:      object
    difference_count:   int
    coherence_constant: float
    notes:              dict = field(default_factory=dict)

    def as_rows(self):
        """[(bound, N or None, formula), ...] for CSV / text output."""
        return [
            ("thresholding", self.thresholding, self.notes.get("thresholding", "")),
            ("omp", self.omp, self.notes.get("omp", "")),
            ("coherence", self.coherence, self.notes.get("coherence", "")),
            ("sparse-solver", self.sparse_solver, self.notes.get("sparse-solver", "")),
        ]


##    <(''<)  <( ' ' )>  (>'')>
# DIFFERENCE SETS
##    <(''<)  <( ' ' )>  (>'')>

def _nonzero_differences(frequencies):
    """Distinct nonzero k - k' over Gamma, shape (D', d), lexicographic."""
    freqs = frequencies.frequencies
    size = freqs.shape[0]
    width = max(1, _SUM_BLOCK_ENTRIES // max(1, size))
    blocks = []
    for start in range(0, size, width):
        block = (freqs[start:start + width, None, :] - freqs[None, :, :]).reshape(-1, freqs.shape[1])
        blocks.append(np.unique(block, axis=0))
    diffs = np.unique(np.concatenate(blocks, axis=0), axis=0)
    return diffs[np.any(diffs != 0, axis=1)]


def _periodic(diffs, grid):
    """Reduce differences mod m; keep one representative per residue.

    Returns:
        (np.ndarray, bool) - representatives, and whether some nonzero
        difference vanished mod m (two identical columns)
    """
    residues = np.mod(diffs, grid)
    collapsed = bool(np.any(np.all(residues == 0, axis=1)))
    keep = np.any(residues != 0, axis=1)
    _, first = np.unique(residues[keep], axis=0, return_index=True)
    return diffs[keep][np.sort(first)], collapsed


def difference_count(frequencies, grid=None):
    """D' = #{k - k' : k, k' in Gamma, k != k'}.

    Args:
        frequencies: FrequencySet
        grid:        int or None - count differences mod m (periodic sense)

    Returns:
        int
    """
    diffs = _nonzero_differences(frequencies)
    if grid is not None:
        diffs, _ = _periodic(diffs, grid)
    return int(diffs.shape[0])


##    <(''<)  <( ' ' )>  (>'')>
# COHERENCE
##    <(''<)  <( ' ' )>  (>'')>

def _exponential_sums(op, diffs):
    """|sum_j exp(i delta . x_j)| / N for every row delta of diffs."""
    sampling = op.sampling
    n = sampling.size
    width = max(1, _SUM_BLOCK_ENTRIES // max(1, n))
    out = np.empty(diffs.shape[0])
    for start in range(0, diffs.shape[0], width):
        block = diffs[start:start + width]
        if op.grid is not None:
            phases = np.mod(sampling.grid_indices @ block.T, op.grid)
            sums = op._roots[phases].sum(axis=0)
        else:
            sums = np.exp(1j * (sampling.points @ block.T)).sum(axis=0)
        out[start:start + width] = np.abs(sums) / n
    return out


def _pair_for_difference(frequencies, delta, grid=None):
    """First (j, k) in canonical order with k - j equal to delta (mod m)."""
    freqs = frequencies.frequencies
    if grid is None:
        lookup = {tuple(f): i for i, f in enumerate(freqs)}
        for j, f in enumerate(freqs):
            k = lookup.get(tuple(f + delta))
            if k is not None:
                return (j, k)
    else:
        lookup = {}
        for i, f in enumerate(freqs):
            lookup.setdefault(tuple(np.mod(f, grid)), i)
        for j, f in enumerate(freqs):
            k = lookup.get(tuple(np.mod(f + delta, grid)))
            if k is not None and k != j:
                return (j, k)
    raise SupportError(f"difference {delta.tolist()} does not occur in the frequency set")


def max_recoverable_sparsity(mu, size):
    """Largest M <= D with (2M - 1) mu < 1."""
    if mu <= 0.0:
        return int(size)
    candidate = int(math.floor((1.0 / mu + 1.0) / 2.0))
    while candidate < size and (2 * candidate + 1) * mu < 1.0:
        candidate += 1
    while candidate > 0 and (2 * candidate - 1) * mu >= 1.0:
        candidate -= 1
    return int(min(max(candidate, 0), size))


def coherence(op):
    """Coherence of a measurement operator.

    Fourier operators are scanned over the distinct differences of Gamma
    (mod m under the discrete model). The gaussian ensemble falls back to the
    dense normalized Gram matrix.

    Args:
        op: MeasurementOperator or GaussianOperator with D >= 2

    Returns:
        CoherenceReport

    Raises:
        SupportError: D < 2
    """
    if op.cols < 2:
        raise SupportError("coherence needs at least two columns")

    if not op.is_fourier:
        cols = op.dense() / op.column_norms
        gram = np.abs(cols.conj().T @ cols)
        np.fill_diagonal(gram, -1.0)
        flat = int(np.argmax(gram))
        j, k = divmod(flat, op.cols)
        mu = float(min(gram[j, k], 1.0))
        return CoherenceReport(mu, (j, k), max_recoverable_sparsity(mu, op.cols))

    diffs = _nonzero_differences(op.frequencies)
    if op.grid is not None:
        diffs, collapsed = _periodic(diffs, op.grid)
        if collapsed:
            # Two frequencies congruent mod m give identical columns
            residues = np.mod(op.frequencies.frequencies, op.grid)
            _, inverse = np.unique(residues, axis=0, return_inverse=True)
            inverse = np.ravel(inverse)
            pair = None
            for j in range(inverse.size):
                twins = np.flatnonzero(inverse == inverse[j])
                if twins.size > 1:
                    pair = (int(twins[0]), int(twins[1]))
                    break
            return CoherenceReport(1.0, pair, max_recoverable_sparsity(1.0, op.cols))

    values = _exponential_sums(op, diffs)
    best = int(np.argmax(values))
    mu = float(min(values[best], 1.0))
    pair = _pair_for_difference(op.frequencies, diffs[best], op.grid)
    logger.debug("coherence mu=%.6g over %d differences, pair=%s", mu, diffs.shape[0], pair)
    return CoherenceReport(mu, pair, max_recoverable_sparsity(mu, op.cols))


def check_omp_uniform(coh, sparsity):
    """(2M - 1) mu < 1: OMP recovers every M-sparse polynomial on this X."""
    return (2 * sparsity - 1) * coh.mu < 1.0


def check_thresh_uniform(coh, sparsity, dynamic_range):
    """(2M - 1) mu < 1/R: thresholding recovers every M-sparse polynomial
    with dynamic range at most R on this X.

    Raises:
        ConfigError: R < 1
    """
    if dynamic_range < 1.0:
        raise ConfigError(f"dynamic range must be >= 1, got {dynamic_range}")
    return (2 * sparsity - 1) * coh.mu < 1.0 / dynamic_range


##    <(''<)  <( ' ' )>  (>'')>
# GRAM EIGENVALUES
##    <(''<)  <( ' ' )>  (>'')>

def _report(lmin, lmax, method):
    lmin = max(float(lmin), 0.0)
    lmax = float(lmax)
    return EigBoundReport(lmin, lmax, max(1.0 - lmin, lmax - 1.0), method)


def gram_eigs(sub, dense_max=None, tol=None):
    """Extreme eigenvalues of N^{-1} F_TX^* F_TX.

    Dense Hermitian eigensolve up to dense_max columns, Lanczos (ARPACK) on
    the implicit Gram operator above; lambda_min comes from the top of the
    shifted operator lambda_max I - G.

    Args:
        sub:       SupportOperator
        dense_max: int or None - defaults to CONFIG['eig_dense_max']
        tol:       float or None - Lanczos tolerance, CONFIG['eig_iter_tol']

    Returns:
        EigBoundReport

    Raises:
        SupportError: M above CONFIG['gram_max_support']
    """
    dense_max = CONFIG["eig_dense_max"] if dense_max is None else dense_max
    tol       = CONFIG["eig_iter_tol"] if tol is None else tol
    n = float(sub.parent.rows)

    if sub.size > CONFIG["gram_max_support"]:
        raise SupportError(
            f"Gram eigenvalues are only computed for M <= {CONFIG['gram_max_support']}")

    if sub.size <= dense_max:
        eigs = scipy.linalg.eigh(sub.gram() / n, eigvals_only=True)
        return _report(eigs[0], eigs[-1], "dense")

    matrix = sub.matrix

    def gram_matvec(v):
        v = np.asarray(v, dtype=np.complex128).ravel()
        return matrix.conj().T @ (matrix @ v) / n

    size = sub.size
    gram = LinearOperator((size, size), matvec=gram_matvec, rmatvec=gram_matvec,
                          dtype=np.complex128)
    lmax = float(eigsh(gram, k=1, which="LA", tol=tol, return_eigenvectors=False)[0])

    def shifted_matvec(v):
        return lmax * np.asarray(v, dtype=np.complex128).ravel() - gram_matvec(v)

    shifted = LinearOperator((size, size), matvec=shifted_matvec, rmatvec=shifted_matvec,
                             dtype=np.complex128)
    top = float(eigsh(shifted, k=1, which="LA", tol=tol, return_eigenvectors=False)[0])
    logger.debug("Lanczos Gram extremes for M=%d: [%.6g, %.6g]", size, lmax - top, lmax)
    return _report(lmax - top, lmax, "lanczos")


##    <(''<)  <( ' ' )>  (>'')>
# RESTRICTED ISOMETRY
##    <(''<)  <( ' ' )>  (>'')>

def _batched(iterable, size):
    iterator = iter(iterable)
    while True:
        chunk = list(itertools.islice(iterator, size))
        if not chunk:
            return
        yield chunk


def ric_bruteforce(op, max_sparsity, budget=None):
    """Restricted isometry constants by enumerating every support.

    delta_M is the largest max(1 - lambda_min, lambda_max - 1) of the Gram
    matrix of the normalized columns over all |T| <= M. Fourier columns are
    scaled by N^{-1/2} and their Gram diagonal is exactly 1, so delta_1 = 0.

    Args:
        op:           LinearMeasurement
        max_sparsity: int - Mmax >= 1
        budget:       int or None - cap on sum_{M <= Mmax} C(D, M),
                      defaults to CONFIG['ric_subset_budget']

    Returns:
        RICReport

    Raises:
        BudgetExceededError: too many supports
    """
    budget = CONFIG["ric_subset_budget"] if budget is None else budget
    size = op.cols
    if max_sparsity < 1 or max_sparsity > size:
        raise SupportError(f"Mmax must lie in [1, D = {size}], got {max_sparsity}")

    total = sum(math.comb(size, m) for m in range(1, max_sparsity + 1))
    if total > budget:
        raise BudgetExceededError(
            f"{total} supports up to size {max_sparsity} exceed the budget of {budget}")

    matrix = op.dense()
    if op.is_fourier:
        matrix = matrix / np.sqrt(op.rows)
    gram = matrix.conj().T @ matrix
    gram = 0.5 * (gram + gram.conj().T)
    if op.is_fourier:
        np.fill_diagonal(gram, 1.0)

    deltas, running = [], 0.0
    for m in range(1, max_sparsity + 1):
        worst = 0.0
        for chunk in _batched(itertools.combinations(range(size), m), CONFIG["ric_batch_size"]):
            idx = np.asarray(chunk, dtype=np.int64)
            blocks = gram[idx[:, :, None], idx[:, None, :]]
            eigs = np.linalg.eigvalsh(blocks)
            worst = max(worst, float(np.max(np.maximum(1.0 - eigs[:, 0], eigs[:, -1] - 1.0))))
        running = max(running, worst)
        deltas.append(running)
        logger.debug("delta_%d = %.6g", m, running)

    crt = max_sparsity // 3
    condition = crt >= 1 and deltas[crt - 1] + deltas[2 * crt - 1] + deltas[3 * crt - 1] < 1.0
    return RICReport(tuple(deltas), crt, bool(condition), total)


##    <(''<)  <( ' ' )>  (>'')>
# SAMPLE COUNTS
##    <(''<)  <( ' ' )>  (>'')>

def _model_kind(model):
    if isinstance(model, SamplingModel):
        return model.kind, model.grid
    if model in (MODEL_CONTINUOUS, MODEL_DISCRETE):
        return model, None
    raise ConfigError(f"sample bounds are defined for the continuous or discrete model, got {model!r}")


def sample_bounds(base, sparsity, dynamic_range, eps, model):
    """Sample counts from the explicit-constant recovery bounds.

    Args:
        base:          FrequencySet, or int D for the centered set of size D
        sparsity:      int - M >= 1
        dynamic_range: float - R >= 1
        eps:           float in (0, 1)
        model:         SamplingModel or 'continuous' / 'discrete'; the
                       discrete model counts D' mod m (m = D when no grid is
                       attached)

    Returns:
        SampleBounds - the general sparse-solver bound is reported as None
    """
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")
    if sparsity < 1 or dynamic_range < 1.0:
        raise ConfigError("sample bounds need M >= 1 and R >= 1")

    frequencies = base if isinstance(base, FrequencySet) else FrequencySet.centered(int(base))
    size = frequencies.size
    kind, grid = _model_kind(model)

    if kind == MODEL_DISCRETE:
        grid = size if grid is None else grid
        d_prime = difference_count(frequencies, grid)
        constant = CONFIG["coherence_constant"]
    else:
        d_prime = difference_count(frequencies)
        constant = CONFIG["coherence_constant_continuous"]

    n_thresh = math.ceil(CONFIG["thresholding_constant"] * sparsity * dynamic_range ** 2
                         * math.log(4.0 * size / eps))
    n_omp = math.ceil(CONFIG["omp_constant"] * sparsity * math.log(8.0 * size / eps))
    n_coh = math.ceil(constant * (2 * sparsity - 1) ** 2 * math.log(4.0 * max(d_prime, 1) / eps))

    notes = {
        "thresholding":  f"ceil({CONFIG['thresholding_constant']} M R^2 ln(4D/eps))",
        "omp":           f"ceil({CONFIG['omp_constant']} M ln(8D/eps))",
        "coherence":     f"ceil({constant:.6g} (2M-1)^2 ln(4D'/eps)), D'={d_prime}",
        "sparse-solver": "C M ln(D/eps) with an unstated absolute constant C",
    }
    return SampleBounds(n_thresh, n_omp, n_coh, None, d_prime, constant, notes)


def eigenvalue_band_samples(sparsity, delta, eps):
    """Smallest N keeping N^{-1} F_TX^* F_TX in [1 - delta, 1 + delta] with
    probability 1 - eps for a fixed support of size M.

    N = ceil(3e M delta^{-2} ceil(ln(c M / eps))) with c = (1 - delta^2/e)^{-1}.
    """
    if not 0.0 < delta < 1.0 or not 0.0 < eps < 1.0:
        raise ConfigError("eigenvalue band needs delta and eps in (0, 1)")
    if sparsity < 1 or int(sparsity) != sparsity:
        raise ConfigError(f"eigenvalue band needs an integer M >= 1, got {sparsity}")
    c = 1.0 / (1.0 - delta ** 2 / math.e)
    # c >= 1, M >= 1 and eps < 1 keep the log strictly positive
    moments = math.ceil(math.log(c * sparsity / eps))
    return math.ceil(3.0 * math.e * sparsity * moments / delta ** 2)


def correlation_tail_bound(coefficients, samples, x):
    """Upper bound on P(N^{-1} |<F_TX c, phi_j>| >= x) for j outside T.

    4 exp(-N x^2 / (4 ||c||_2^2 + 4/(3 sqrt 2) ||c||_1 x))
    """
    c = np.asarray(coefficients, dtype=np.complex128).ravel()
    l2 = float(np.linalg.norm(c))
    l1 = float(np.sum(np.abs(c)))
    denominator = 4.0 * l2 ** 2 + 4.0 / (3.0 * math.sqrt(2.0)) * l1 * x
    if denominator == 0.0:
        # c = 0: the correlation is identically zero
        return 0.0 if x > 0 else 1.0
    return min(1.0, 4.0 * math.exp(-samples * x ** 2 / denominator))


# U S A G I
# from sparsetrig.core.analysis import coherence, check_omp_uniform, sample_bounds
# coh = coherence(op); check_omp_uniform(coh, 2)
# sample_bounds(100, 1, 1.0, 0.1, "discrete").thresholding  # 149
