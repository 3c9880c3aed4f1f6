"""Shared exception types."""


class QhdError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownCurveError(QhdError, KeyError):
    """A curve id is not present in the configuration."""


class UnknownPointError(QhdError, KeyError):
    """A point id is not present in the configuration."""


class NotContractibleError(QhdError, ValueError):
    """Attempt to contract a curve whose self-intersection is not -1."""


class ContractionBlockedError(QhdError, ValueError):
    """A contraction would pass through a singular branch point.

    The calculus refuses these rather than guessing local behaviour; the
    blow-down driver reports them as a failure value.
    """


class UnsupportedBlowUpError(QhdError, ValueError):
    """Blow-up of a point whose local branch data cannot be reconstructed."""


class SingularLatticeError(QhdError, ValueError):
    """An operation requiring a nonsingular intersection form met det = 0."""


class NotStarShapedError(QhdError, ValueError):
    """A star-shaped configuration was required but not found."""


class EnumerationLimitError(QhdError, RuntimeError):
    """A configured combinatorial enumeration bound was exceeded."""


class AmbientMismatchError(QhdError, ValueError):
    """Subgroups of different ambient groups were compared."""
