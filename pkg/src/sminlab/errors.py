"""Exception types shared across the library."""


class InvalidInputError(ValueError):
    """An argument violates an operation's contract."""


class UnsupportedSizeError(ValueError):
    """An exhaustive-search operation was asked to exceed its size bound."""


class PreconditionError(ValueError):
    """A verification routine's hypothesis fails.

    Distinct from a failed conclusion: raising this means the check was
    never applicable, not that it was applied and refuted.
    """
