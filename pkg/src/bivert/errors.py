"""Exception types shared across the package."""


class BivertError(Exception):
    """Base class for all bivert errors."""


class ParseError(BivertError):
    """A line of an input file could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class SchemaError(BivertError):
    """Parsed data violates a structural invariant (dimensions, coverage, ...)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateSentence(BivertError):
    """Preprocessing left nothing to score."""


class ZeroVector(BivertError):
    """Cosine similarity is undefined for an all-zero vector."""


class DegreeError(BivertError):
    """A relation weight was requested for a node with no such outgoing relations."""


class UndefinedCorrelation(BivertError):
    """Pearson correlation is undefined for constant input."""
