"""Exception hierarchy shared by the lab modules."""

from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the lab."""


class DimensionMismatchError(LabError):
    """Raised when vectors, operators or sections of different shape are combined."""


class SpaceMismatchError(LabError):
    """Raised when a section and a symbol live on different space models."""


class NotInvertibleError(LabError):
    """Raised when a central operator (or a symbol) has an entry too close to zero."""

    def __init__(
        self,
        message: str,
        entry: int,
        modulus: float,
        point: Optional[int] = None,
    ):
        super().__init__(message)
        self.entry = entry
        self.modulus = modulus
        self.point = point


class LambdaInPointSpectrumError(LabError):
    """Raised when a resolvent is requested at a diagonal entry."""

    def __init__(self, message: str, lam: complex, entry: int):
        super().__init__(message)
        self.lam = lam
        self.entry = entry


class ExpressionSyntaxError(LabError):
    """Malformed symbol expression; `position` is a 0-based character offset."""

    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class EvaluationError(LabError):
    """Raised when an expression cannot be evaluated at some point."""

    def __init__(self, message: str, point: Optional[int] = None):
        super().__init__(message)
        self.point = point


class DivisionByZeroError(EvaluationError):
    pass


class LogOfZeroError(EvaluationError):
    pass


class CocycleViolationError(LabError):
    """Semigroup samples fail m(t + s) = m(t) m(s)."""

    def __init__(self, message: str, t: float, s: float, defect: float):
        super().__init__(message)
        self.t = t
        self.s = s
        self.defect = defect


class RecoveryError(LabError):
    """Recovered generator does not reproduce the semigroup samples."""


class ConfigError(LabError):
    """Invalid scenario file or scenario parameters."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.line = line
        self.field = field


class AnalysisError(LabError):
    """An analysis failed while running a scenario."""

    def __init__(self, analysis: str, cause: Exception):
        super().__init__(f"Analysis '{analysis}' failed: {cause}")
        self.analysis = analysis
        self.cause = cause
