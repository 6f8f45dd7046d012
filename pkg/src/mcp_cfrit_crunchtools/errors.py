"""Safe error types that can be shown to users.

Every error raised across a module boundary derives from UserError. Messages
must never contain secret key material.
"""


class UserError(Exception):
    """Base class for safe errors that can be shown to users.

    Messages in UserError subclasses describe the violated condition and the
    offending public values only. Secret exponents are never included.
    """

    pass


class ConfigurationError(UserError):
    """Error in environment configuration."""

    pass


class ValidationError(UserError):
    """Input validation error."""

    pass


class DomainError(ValidationError):
    """A number-theoretic precondition does not hold."""

    pass


class GuardError(ValidationError):
    """A size guard on an exponential-cost operation was exceeded."""

    def __init__(self, size: int, limit: int) -> None:
        super().__init__(f"Size {size} exceeds the factorial guard (max {limit}).")


class SafePrimeNotFoundError(UserError):
    """No safe prime exists for the requested bit length."""

    def __init__(self, kappa: int) -> None:
        super().__init__(f"No {kappa}-bit q with 2q + 1 prime was found.")


class DegenerateDataError(UserError):
    """Tuning data cannot identify a gain (singular Gram matrix, too few samples)."""

    pass


class CorruptCiphertextError(UserError):
    """Decrypted data does not decode to a valid encoding."""

    pass


class ScenarioError(UserError):
    """Malformed scenario file.

    The message carries the line and column of JSON syntax errors.
    """

    def __init__(self, source: str, detail: str, line: int | None = None,
                 column: int | None = None) -> None:
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"Invalid scenario {source}{where}: {detail}")
