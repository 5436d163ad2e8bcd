class BraidscapeError(Exception):
    """Base exception for braidscape."""


class TreeValidationError(BraidscapeError, ValueError):
    """Raised when a tree file or tree structure violates the tree invariants."""


class InsufficientSubdivisionError(BraidscapeError):
    """Raised when an operation needs a tree sufficiently subdivided for n."""


class CellCapExceededError(BraidscapeError):
    """Raised when a cell enumeration would exceed the configured cell cap."""


class ArcSearchCapExceededError(BraidscapeError):
    """Raised when an arc search exhausts its collection cap or timeout."""


class CellMembershipError(BraidscapeError):
    """Raised when a cell predicate is asked about a non-member or an invalid cell."""


class DiagramMismatchError(BraidscapeError):
    """Raised when cloud diagrams over different trees or n are compared."""


class MissingCriticalCellError(BraidscapeError):
    """Raised when a product's least upper bound class contains no critical cell."""


class CertificateInconsistentError(BraidscapeError):
    """Raised when a certificate does not fit its tree or fails its own checks."""


class PlannerError(BraidscapeError):
    """Raised when a motion plan cannot be produced for the given input."""


class ConfigurationParseError(BraidscapeError, ValueError):
    """Raised when a configuration or cell literal is malformed."""
