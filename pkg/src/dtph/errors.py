"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`DTPHError`, so callers can catch the family in one clause.
Errors that carry numbers (residuals, ranks) keep them as attributes.
"""


class DTPHError(Exception):
    """Base class for all package errors."""


class DimensionError(DTPHError, ValueError):
    """Operand shapes are incompatible."""


class NotPositiveDefinite(DTPHError):
    """A matrix expected to be Hermitian positive definite is not."""

    def __init__(self, msg, min_eig=None):
        super().__init__(msg)
        self.min_eig = min_eig


class Inconsistent(DTPHError):
    """A linear system has no solution within tolerance."""

    def __init__(self, msg, residual=None, bound=None):
        super().__init__(msg)
        self.residual = residual
        self.bound = bound


class NonUnique(DTPHError):
    """A linear system has a nontrivial kernel."""

    def __init__(self, msg, kernel_dim=None):
        super().__init__(msg)
        self.kernel_dim = kernel_dim


class NotAGraph(DTPHError):
    """A relation contains a pair (0, w) with w != 0."""


class SingularPencil(DTPHError):
    """det(sE - A) vanishes identically."""


class IndexTooHigh(DTPHError):
    """The pencil (E, A) has Kronecker index larger than one."""


class InconsistentInitialState(DTPHError):
    """x0 violates the algebraic constraints of a descriptor system."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class StepError(DTPHError):
    """A simulation step could not be solved uniquely."""

    def __init__(self, msg, step=None, residual=None, kernel_dim=None):
        super().__init__(msg)
        self.step = step
        self.residual = residual
        self.kernel_dim = kernel_dim


class NonUniqueStep(StepError):
    pass


class InconsistentStep(StepError):
    pass


class NotFound(DTPHError):
    """No storage weight could be certified; ``reason`` says why."""

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class NotScatteringPH(DTPHError):
    """The weighted LMI fails for the given storage weight."""


class NotMonotone(DTPHError):
    pass


class NotLagrangian(DTPHError):
    pass


class CouplingError(DTPHError):
    """Base class for interconnection failures."""


class PortMismatch(CouplingError, DimensionError):
    pass


class NonContractiveCoupling(CouplingError):
    pass


class CouplingSingular(CouplingError):
    """I - D1^11 D2^11 is singular; the coupled ports cannot be eliminated."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class FeedbackSingular(CouplingSingular):
    pass


class NotIdentityE(CouplingError):
    pass


class FormatError(DTPHError, ValueError):
    """A JSON or CSV document does not follow the expected schema."""

    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field
