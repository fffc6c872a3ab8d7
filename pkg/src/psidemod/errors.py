"""Exception types shared across the toolkit."""


class RefusalError(ValueError):
    """An input violates a documented precondition, so the operation refuses to run.

    The message names the violated condition and the offending values.
    """


class DegeneracyError(RuntimeError):
    """The requested computation is numerically degenerate for the given data."""
