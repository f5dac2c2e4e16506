"""Exception types shared across the package."""


class PlateauError(Exception):
    """Base class for all package-specific errors."""


class GroupMismatchError(PlateauError):
    """Operands belong to different group realizations."""


class BallCapExceeded(PlateauError):
    """A word-ball enumeration would exceed the configured element cap."""


class ConfigError(PlateauError):
    """An experiment configuration is missing or malformed; carries the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvariantViolation(PlateauError):
    """A certified invariant (e.g. 1-Lipschitz mass monotonicity) failed numerically."""


class AdmissibilityError(PlateauError):
    """A vector fails the admissibility conditions of the barycenter functional."""


class InvalidWitness(PlateauError):
    """A recorded small-displacement witness does not validate at the claimed level."""
