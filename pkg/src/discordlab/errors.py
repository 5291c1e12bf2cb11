"""Exception types shared across the package.

``DiscordLabError`` is the common base; its ``exit_code`` attribute drives the
CLI exit status (1 for numeric/convergence failures, 2 for input problems).
"""


class DiscordLabError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class BadSpec(DiscordLabError):
    """Malformed state specification, input file, or CLI argument."""

    exit_code = 2


class MissingProjectors(BadSpec):
    """A count record lacks the projectors required by an estimator."""


class NonHermitian(DiscordLabError):
    """Matrix fails the Hermiticity check."""


class DimensionMismatch(DiscordLabError):
    """Operands have incompatible or unsupported dimensions."""


class NotPSD(DiscordLabError):
    """Matrix has an eigenvalue below the tolerated negative floor."""


class InvalidState(DiscordLabError):
    """Array does not satisfy the density-matrix invariants."""


class OutOfRange(DiscordLabError):
    """Scalar parameter outside its admissible interval."""


class ConditionalOnNullEvent(DiscordLabError):
    """Conditioning on a measurement outcome of (near) zero probability."""


class DegenerateParams(DiscordLabError):
    """Cholesky-style parameters with vanishing normalization."""


class NotConverged(DiscordLabError):
    """Optimizer exhausted its budget without meeting the tolerances."""


class InconsistentConditionals(DiscordLabError):
    """Conditional-state probabilities do not sum to one."""


class MinimizationError(DiscordLabError):
    """Measurement optimization returned an unphysical result."""
