"""
core/errors.py

Exception hierarchy for sparsetrig.

Every error raised on purpose by the package derives from SparseTrigError so
the CLI can map it to an exit code in one place:

    ConfigError                  - bad configuration or arguments  -> exit 2
    DegenerateSelectionError     - rank-deficient column selected  -> exit 3
    SingularSystemError          - singular F F^* or Gram matrix   -> exit 3
    LeastSquaresConvergenceError - iterative LS hit its cap        -> exit 3

Value-shaped problems (wrong lengths, empty supports, budgets) also inherit
ValueError so plain callers can catch them the usual way.
"""


EXIT_OK             = 0
EXIT_CONFIG_ERROR   = 2
EXIT_SOLVER_ABORT   = 3


class SparseTrigError(Exception):
    """Base class for all sparsetrig errors."""

    exit_code = EXIT_SOLVER_ABORT


class ConfigError(SparseTrigError, ValueError):
    """Invalid configuration, CLI arguments or experiment settings."""

    exit_code = EXIT_CONFIG_ERROR


class DimensionMismatchError(SparseTrigError, ValueError):
    """Vector length or point dimension does not match the operator."""

    exit_code = EXIT_CONFIG_ERROR


class SupportError(SparseTrigError, ValueError):
    """Empty, oversized or otherwise invalid support set."""

    exit_code = EXIT_CONFIG_ERROR


class BudgetExceededError(SparseTrigError, ValueError):
    """A brute-force enumeration would exceed its configured budget."""

    exit_code = EXIT_CONFIG_ERROR


class DegenerateSelectionError(SparseTrigError):
    """A greedy step selected a column in the span of the previous ones.

    Attributes:
        index:     int - canonical column index that was selected
        iteration: int - 1-based greedy iteration
        norm:      float - norm of the orthogonalized column
    """

    def __init__(self, index, iteration, norm):
        self.index     = index
        self.iteration = iteration
        self.norm      = norm
        super().__init__(
            f"degenerate selection of column {index} at iteration {iteration} "
            f"(orthogonalized norm {norm:.3e})"
        )


class SingularSystemError(SparseTrigError):
    """A matrix that must be inverted is numerically singular."""


class LeastSquaresConvergenceError(SparseTrigError):
    """The iterative least-squares backend did not converge.

    Attributes:
        iterations: int - iterations performed before giving up
    """

    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(
            message or f"iterative least squares did not converge in {iterations} iterations"
        )


class InfeasibleProblemError(SparseTrigError, ValueError):
    """The samples are not in the range of the measurement operator."""

    exit_code = EXIT_CONFIG_ERROR


class CyclingGuardError(SparseTrigError):
    """The linear-programming oracle exceeded its iteration guard."""
