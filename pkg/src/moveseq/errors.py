"""Exception types shared across the package."""


class MoveseqError(Exception):
    """Base class for domain errors (maps to CLI exit code 1)."""


class ParseError(MoveseqError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(MoveseqError):
    """Structural mismatch: wrong format version, tensor shape, or field set."""


class DegeneratePoseError(MoveseqError):
    """Pose geometry too degenerate to fit a body frame, with no fallback."""


class UnrecoverableJointError(MoveseqError):
    """A joint is invalid in every frame of a sequence."""
