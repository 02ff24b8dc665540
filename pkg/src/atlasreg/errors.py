"""Exception types shared across the package."""


class InvalidShape(ValueError):
    """Operands have incompatible or unsupported shapes."""


class ContractViolation(ValueError):
    """An argument breaks a documented precondition."""


class DegenerateInput(ValueError):
    """Input carries no usable signal (e.g. constant image for alignment)."""


class InsufficientData(ValueError):
    """Fewer samples available than the operation requires."""


class UnknownDomain(KeyError):
    """Requested domain tag is not present in the atlas/corpus."""


class FormatError(ValueError):
    """A binary container failed to parse; message carries the byte offset."""


class UndefinedMetric(ValueError):
    """Metric is undefined for the given matrix size or missing baseline."""


class IncompleteRun(ValueError):
    """A run directory is missing checkpoints needed for evaluation."""
