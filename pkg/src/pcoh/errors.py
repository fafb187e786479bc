"""Exception hierarchy shared by every module.

Each exception class carries the process exit code the CLI maps it to.
"""


class PcohError(Exception):
    exit_code = 1


class StructuralError(PcohError, ValueError):
    """Web mismatch, ill-formed multiset, unequal partition targets, ..."""

    exit_code = 2


class FrontEndError(PcohError):
    exit_code = 2


class PcfSyntaxError(FrontEndError):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class PcfTypeError(FrontEndError):
    def __init__(self, message, term=None):
        super().__init__(message if term is None else f"{message} in `{term}`")
        self.term = term


class CapabilityError(PcohError):
    """A computation is out of the desk-scale budget (dimension, degree, ...)."""

    exit_code = 3


class DegreeOverflow(CapabilityError):
    pass


class InfiniteNorm(CapabilityError):
    """The polar LP is unbounded: some coordinate lies outside every generator."""


class EstimationError(CapabilityError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class DomainError(PcohError, ValueError):
    """A point is outside the region where an operation is defined."""

    exit_code = 3


class PropertyViolation(PcohError):
    exit_code = 4

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
