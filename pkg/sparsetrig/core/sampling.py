"""
core/sampling.py

Sampling models, sampling sets and seeded random streams.

Responsibilities:
    - SamplingModel: continuous(d), discrete(m, d) or gaussian(N, D)
    - SamplingSet: N points in [0, 2pi]^d plus the model and seed that made them
    - draw_continuous / draw_discrete / draw_gaussian_matrix
    - Seeded generators and per-trial seed derivation

Random streams use numpy's counter-based Philox bit generator. Derived seeds
hash (seed, *keys) through numpy's SeedSequence, so trial streams never
overlap and do not depend on execution order or worker count.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sparsetrig.core.errors import ConfigError, DimensionMismatchError

logger = logging.getLogger(__name__)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# SEED DERIVATION RULE
# Bumped whenever derive_seed changes; written into every result row.
# (つ -' _ '- )つ    (つ -' _ '- )つ

SEED_RULE_VERSION = "philox-seedseq-v1"

MODEL_CONTINUOUS = "continuous"
MODEL_DISCRETE   = "discrete"
MODEL_GAUSSIAN   = "gaussian"

TWO_PI = 2.0 * np.pi


##    <(''<)  <( ' ' )>  (>'')>
# RANDOM STREAMS
##    <(''<)  <( ' ' )>  (>'')>

def make_rng(seed):
    """Philox-backed generator for an integer seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seed(seed, *keys):
    """Hash a base seed and integer keys into a 64-bit seed.

    Args:
        seed: int - base experiment seed
        keys: ints - e.g. (trial, M)

    Returns:
        int - derived 64-bit seed
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _as_generator(rng):
    """Accept a Generator or an int seed; return (generator, seed or None)."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, (int, np.integer)):
        return make_rng(rng), int(rng)
    raise ConfigError(f"expected a numpy Generator or an integer seed, got {type(rng).__name__}")


##    <(''<)  <( ' ' )>  (>'')>
# MODEL AND SET TYPES
##    <(''<)  <( ' ' )>  (>'')>

@dataclass(frozen=True)
class SamplingModel:
    """Which probability model produced a sampling set.

    Attributes:
        kind:      str - 'continuous', 'discrete' or 'gaussian'
        dimension: int - d (points) or 0 for the gaussian ensemble
        grid:      int or None - m for the discrete model
        rows:      int or None - N for the gaussian ensemble
        cols:      int or None - D for the gaussian ensemble
        distinct:  bool - discrete draws without replacement
    """

    kind:      str
    dimension: int = 1
    grid:      int = None
    rows:      int = None
    cols:      int = None
    distinct:  bool = False

    def __post_init__(self):
        if self.kind not in (MODEL_CONTINUOUS, MODEL_DISCRETE, MODEL_GAUSSIAN):
            raise ConfigError(f"unknown sampling model {self.kind!r}")
        if self.kind == MODEL_DISCRETE and (self.grid is None or self.grid < 2):
            raise ConfigError(f"discrete model needs grid size m >= 2, got {self.grid}")
        if self.kind != MODEL_GAUSSIAN and self.dimension < 1:
            raise ConfigError("sampling dimension must be >= 1")

    @classmethod
    def continuous(cls, dimension=1):
        return cls(MODEL_CONTINUOUS, dimension)

    @classmethod
    def discrete(cls, grid, dimension=1, distinct=False):
        return cls(MODEL_DISCRETE, dimension, grid=grid, distinct=distinct)

    @classmethod
    def gaussian(cls, rows, cols):
        return cls(MODEL_GAUSSIAN, 0, rows=rows, cols=cols)

    @property
    def label(self):
        """Short label written into result files."""
        if self.kind == MODEL_DISCRETE:
            mode = "distinct" if self.distinct else "replacement"
            return f"discrete(m={self.grid},d={self.dimension},{mode})"
        if self.kind == MODEL_GAUSSIAN:
            return f"gaussian(N={self.rows},D={self.cols})"
        return f"continuous(d={self.dimension})"


@dataclass(frozen=True, eq=False)
class SamplingSet:
    """Ordered sampling points x_1..x_N in radians.

    Attributes:
        points:       np.ndarray shape (N, d) - coordinates in [0, 2pi)
        model:        SamplingModel
        seed:         int or None - seed of the stream that drew the points
        grid_indices: np.ndarray shape (N, d) of int, or None - integer grid
                      coordinates under the discrete model (x = 2pi g / m)
    """

    points:       np.ndarray = field(repr=False)
    model:        SamplingModel
    seed:         int = None
    grid_indices: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if self.grid_indices is not None:
            grid = np.array(self.grid_indices, dtype=np.int64).reshape(points.shape)
            grid.setflags(write=False)
            object.__setattr__(self, "grid_indices", grid)

    @property
    def size(self):
        """N, duplicates included."""
        return self.points.shape[0]

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.size

    def prefix(self, count):
        """The first count points (streams are drawn sequentially)."""
        grid = None if self.grid_indices is None else self.grid_indices[:count]
        return SamplingSet(self.points[:count], self.model, self.seed, grid)


##    <(''<)  <( ' ' )>  (>'')>
# DRAWS
##    <(''<)  <( ' ' )>  (>'')>

def draw_continuous(dimension, count, rng):
    """N i.i.d. points uniform on [0, 2pi)^d.

    Args:
        dimension: int - d
        count:     int - N >= 1
        rng:       np.random.Generator or int seed

    Returns:
        SamplingSet
    """
    if count < 1:
        raise ConfigError("a sampling set needs at least one point")
    gen, seed = _as_generator(rng)
    points = gen.uniform(0.0, TWO_PI, size=(count, dimension))
    return SamplingSet(points, SamplingModel.continuous(dimension), seed)


def draw_discrete(grid, dimension, count, rng, distinct=False):
    """N points from the grid (2pi/m) Z_m^d.

    With distinct=False points are i.i.d. uniform with replacement and repeated
    points stay as repeated rows. With distinct=True a size-N subset of the m^d
    grid points is chosen uniformly, as the first N entries of a random
    permutation. Both modes are nested: the same stream drawn for N < N' gives
    the first N points of the larger draw.

    Args:
        grid:      int - m >= 2
        dimension: int - d
        count:     int - N >= 1
        rng:       np.random.Generator or int seed
        distinct:  bool

    Returns:
        SamplingSet with grid_indices set

    Raises:
        ConfigError: m < 2, N < 1, or distinct with N > m^d
    """
    if grid < 2:
        raise ConfigError(f"grid size m must be >= 2, got {grid}")
    if count < 1:
        raise ConfigError("a sampling set needs at least one point")

    gen, seed = _as_generator(rng)

    if distinct:
        total = grid ** dimension
        if count > total:
            raise ConfigError(f"cannot draw {count} distinct points from a grid of {total}")
        flat = gen.permutation(total)[:count]
        indices = np.stack(np.unravel_index(flat, (grid,) * dimension), axis=1)
    else:
        indices = gen.integers(0, grid, size=(count, dimension))

    points = TWO_PI * indices / grid
    model  = SamplingModel.discrete(grid, dimension, distinct=distinct)
    return SamplingSet(points, model, seed, indices)


def draw_gaussian_matrix(rows, cols, rng):
    """N x D real matrix with i.i.d. N(0, 1/N) entries.

    Args:
        rows: int - N >= 1
        cols: int - D >= 1
        rng:  np.random.Generator or int seed

    Returns:
        np.ndarray shape (N, D)
    """
    if rows < 1 or cols < 1:
        raise DimensionMismatchError(f"gaussian matrix needs N, D >= 1, got ({rows}, {cols})")
    gen, _ = _as_generator(rng)
    return gen.normal(0.0, 1.0 / np.sqrt(rows), size=(rows, cols))


def count_duplicates(sampling):
    """Number of rows that repeat an earlier row."""
    unique = np.unique(sampling.points, axis=0).shape[0]
    return sampling.size - unique


# U S A G I
# from sparsetrig.core.sampling import draw_discrete, make_rng
# X = draw_discrete(100, 1, 40, make_rng(7), distinct=True)
