"""Exception hierarchy shared by every jetgeo module."""


class JetGeoError(Exception):
    """Base class for all errors raised by jetgeo."""


class ParseError(JetGeoError):
    """Malformed expression text."""

    def __init__(self, message: str, offset: int, expected: str | None = None):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class EvalError(JetGeoError):
    """Numeric evaluation of an expression failed."""


class UnboundSymbolError(EvalError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound symbol {name!r}")


class DomainError(EvalError):
    """Real-arithmetic domain violation (log of non-positive, 1/0, ...)."""

    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in {subexpression}")


class MetricError(JetGeoError):
    """Metric pair is malformed or not positive definite where evaluated."""


class SystemSpecError(JetGeoError):
    """ODE system description violates a structural precondition."""


class CurveError(JetGeoError):
    """Sampled curve violates the sampling invariants."""
