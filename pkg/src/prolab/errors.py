"""Exception types shared across the toolkit."""


class PlabError(Exception):
    """Base class for every error raised by this package."""


class ChartMismatchError(PlabError):
    """A variable or value does not belong to the expected coordinate chart."""


class IncompletePointError(PlabError):
    """A point assignment is missing one or more chart variables."""


class OrderMismatchError(PlabError):
    """Jets of different orders were combined."""


class CompositionMismatchError(PlabError):
    """Source/target points do not line up for jet composition."""


class InverseVerificationError(PlabError):
    """A declared inverse map failed to compose to the identity."""


class UnsupportedFormError(PlabError):
    """An operation required an explicit solved form and did not get one."""


class EmptyLocusError(PlabError):
    """The equations force a nonzero constant to vanish; the locus is empty."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NotOnLocusError(PlabError):
    """A supplied point does not satisfy the system's equations."""


class SingularPointError(PlabError):
    """Evaluation hit a pole or a rank drop at the given point."""


class SamplingError(PlabError):
    """No exact on-locus sampling strategy applies to this system."""


class InternalInvariantError(PlabError):
    """A computed object violated an invariant the code relies on (a bug)."""


class DslSyntaxError(PlabError):
    """Parse failure in an input file, with source location."""

    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
