from ..errors import NondifferentiablePoint, TWMError


class FexprError(TWMError):
    """An expression error tied to a source position."""

    def __init__(self, message, pos=None, token=None):
        self.pos = pos
        self.token = token
        where = f" at {pos}" if pos is not None and pos.line else ""
        tok = f" near {token!r}" if token is not None else ""
        super().__init__(f"{message}{where}{tok}")


class FexprSyntaxError(FexprError):
    pass


class ArityError(FexprError):
    pass


class UnknownIdentifier(FexprError):
    pass


class ShapeError(FexprError):
    """A vector appears where a scalar is required, or vice versa."""


class DomainError(FexprError):
    """ln/sqrt outside their domain, division by zero, and similar."""


class IndexOutOfRange(FexprError):
    pass


class NondifferentiableExpr(FexprError, NondifferentiablePoint):
    """Gradient requested at a min/max tie or abs(0)."""
