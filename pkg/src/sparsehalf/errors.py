"""Exception types shared across the package.

The CLI maps these onto exit codes: malformed input / bad usage -> 2,
guard violations (work too large for an exhaustive path) -> 3, numerical
failures -> 4.
"""


class GuardError(RuntimeError):
    """An exhaustive or dense-linear-algebra path was asked to exceed its size guard."""


class NumericError(RuntimeError):
    """A numerical procedure failed (non-finite values, no feasible point, ...)."""


class FormatError(ValueError):
    """A text artifact (formula file, sample file, predictor file, ...) is malformed."""
