"""Exception types shared across the package."""


class MetageoError(Exception):
    """Base class for all errors raised by metageo."""


class ParseError(MetageoError, ValueError):
    """Malformed word or group description.

    ``position`` is the 0-based token index the error refers to, or ``None``
    when the error is not tied to a single token.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"token {position}: {message}"
        super().__init__(message)
        self.position = position


class AlphabetMismatchError(MetageoError, ValueError):
    pass


class CapExceededError(MetageoError, RuntimeError):
    """An exact solver or oracle was asked to go beyond its configured size cap."""


class InvalidInstanceError(MetageoError, ValueError):
    pass
