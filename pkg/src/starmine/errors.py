"""Exception types shared across the package."""


class StarmineError(Exception):
    """Base class for all starmine errors."""


class InputError(StarmineError):
    """Malformed or unusable input data (bad file, bad line, empty universe)."""


class InvariantError(StarmineError):
    """An internal consistency guarantee was violated; indicates a bug."""
