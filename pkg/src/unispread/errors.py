"""Exception types shared across the package."""


class SpreadError(Exception):
    """Base class for all package errors."""


class ValidationError(SpreadError):
    """Malformed input: bad files, incompatible dimensions, bad parameters."""


class MassMismatchError(SpreadError):
    """Two measures that must balance do not: no transport plan can exist."""


class CountMismatchError(MassMismatchError):
    """Point counts differ where a bijection is required."""

    def __init__(self, source_count: int, target_count: int, message: str = ""):
        self.source_count = source_count
        self.target_count = target_count
        detail = message or "point count mismatch"
        super().__init__(f"{detail}: {source_count} source points vs {target_count} target points")
