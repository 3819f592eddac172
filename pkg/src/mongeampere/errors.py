"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class MongeAmpereError(Exception):
    """Base class for all errors raised by the engine."""


class ExprSyntaxError(MongeAmpereError):
    """Malformed expression text. ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class FormalOrderError(MongeAmpereError):
    """A formal-function partial of order three was requested."""


class EvaluationError(MongeAmpereError):
    """Evaluation failed at a point (division by zero, domain violation, overflow)."""


class DomainError(EvaluationError):
    pass


class UnboundSymbolError(MongeAmpereError):
    pass


class ExactModeError(MongeAmpereError):
    """A transcendental value appeared while exact rational evaluation was requested."""


class SamplingError(MongeAmpereError):
    """No usable sample points: the expression is singular on the whole box."""


class NonConstantRankError(MongeAmpereError):
    """Pointwise ranks disagree across sample points."""

    def __init__(self, what: str, ranks, points):
        self.ranks = list(ranks)
        self.points = list(points)
        witnesses = ", ".join(
            f"rank {r} at {tuple(str(c) for c in pt)}" for r, pt in zip(self.ranks, self.points)
        )
        super().__init__(f"non-constant rank of {what}: {witnesses}")


class NotCartanError(MongeAmpereError):
    """The field is not annihilated by the contact form."""


class DegenerateFieldError(MongeAmpereError):
    """A vector field that must be nonzero vanishes on the sample box."""


class PivotError(MongeAmpereError):
    """Symbolic elimination found no pivot that is nonzero at the base point."""


class NotParabolicError(MongeAmpereError):
    def __init__(self, message: str, sign: str):
        super().__init__(message)
        self.sign = sign


class MixedDegeneracyError(MongeAmpereError):
    """A branching coefficient vanishes on part of the box only."""


class InconsistencyError(MongeAmpereError):
    """A structural identity that must hold for valid input was violated."""


class ChartError(MongeAmpereError):
    """A coordinate chart is singular, non-contact, or could not be inverted."""
