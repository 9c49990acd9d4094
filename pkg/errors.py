"""
Exception hierarchy for the integrated algebraic series engine.
Every failure a caller can act on has its own class; the CLI maps
PreconditionError to exit code 2 and everything else to exit code 1.
"""


class IanError(Exception):
    """Base class for all engine errors."""


class PreconditionError(IanError):
    """An operation was called outside its documented domain."""


class ArityMismatch(PreconditionError):
    pass


class NonUnitReciprocal(PreconditionError):
    pass


class TranslationOutsideDomain(PreconditionError):
    pass


class NonvanishingSubstitution(PreconditionError):
    pass


class NotSimpleRoot(PreconditionError):
    pass


class InconsistentDefinition(PreconditionError):
    pass


class ZeroPolynomial(PreconditionError):
    pass


class NotIsolating(PreconditionError):
    pass


class DegenerateDiscriminant(PreconditionError):
    pass


class PointOutsideRadii(PreconditionError):
    pass


class NotRegular(PreconditionError):
    pass


class NotInvertible(PreconditionError):
    pass


class SingularJacobian(PreconditionError):
    pass


class NonpositiveArgument(PreconditionError):
    pass


class MajorantUnavailable(IanError):
    """A shrink search ran out of steps before certifying a bound."""


class EvaluationStalled(IanError):
    """The evaluation driver hit its order cap before meeting the tolerance."""
