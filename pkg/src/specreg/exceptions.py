"""Error types shared across the package.

Validation failures are split into distinct classes so callers (and the
command-line layer, which maps them onto exit codes) can tell *which*
invariant was violated without parsing messages.
"""


class PositivityError(ValueError):
    """An eigenvalue sequence contains a zero or negative entry."""


class MonotonicityError(ValueError):
    """An eigenvalue sequence is not sorted in nonincreasing order."""


class DynamicRangeError(ValueError):
    """The eigenvalue sequence spans more dynamic range than the penalty
    arithmetic tolerates (the smallest eigenvalue falls below 1e-150 times
    the largest, so squared reciprocals would leave double precision)."""


class FileFormatError(ValueError):
    """An input file exists but does not parse as the expected format."""


class InvariantError(ArithmeticError):
    """A computed quantity failed one of the library's numerical
    self-checks (root residual, reconstruction error, normalization)."""
