"""Exception hierarchy shared by all modules."""


class ProbWeightError(Exception):
    """Base class for errors raised by probweight."""


class DomainError(ProbWeightError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(ProbWeightError, ValueError):
    """Input is well-formed but carries no usable information (e.g. all-zero counts)."""


class InputError(ProbWeightError, ValueError):
    """Malformed dataset or configuration."""


class ResourceError(ProbWeightError, RuntimeError):
    """A requested computation exceeds its documented work budget."""
