"""
Core exceptions for the cyclic cohomology engine.

Provides standardized error codes and messages for the numerical kernel,
category, cochain, Fredholm and homotopy layers.
"""

from typing import Optional, Sequence

DEFAULT_MODULE = "cychern"


class CychernException(Exception):
    """
    Base exception for all cychern errors.

    Carries an integer code and the name of the layer that raised it so
    reports can group failures without parsing messages.
    """

    def __init__(self, message: str, code: int = 1, module: str = DEFAULT_MODULE):
        super().__init__(message)
        self.code = code
        self.module = module
        self.msg = message

    def to_dict(self) -> dict:
        """Serializable form used by reports."""
        return {"code": self.code, "module": self.module, "msg": self.msg}


class DimensionError(CychernException):
    """Matrix shapes do not fit the requested operation."""

    def __init__(self, operation: str, detail: str):
        message = f"Dimension mismatch in {operation}: {detail}"
        super().__init__(message, code=CychernErrorCode.DIMENSION, module="numkernel")


class DomainError(CychernException):
    """A parameter lies outside the domain of the operation."""

    def __init__(self, parameter: str, value: object, expected: str):
        message = f"Invalid {parameter}: {value}. Expected {expected}."
        super().__init__(message, code=CychernErrorCode.DOMAIN, module="numkernel")


class CategoryError(CychernException):
    """Malformed category presentation."""

    def __init__(self, message: str):
        super().__init__(message, code=CychernErrorCode.CATEGORY, module="lincat")


class ComposabilityError(CategoryError):
    """Morphisms or forms whose endpoints do not match."""

    def __init__(self, left: str, right: str, detail: Optional[str] = None):
        message = f"Cannot compose {left} after {right}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.code = CychernErrorCode.COMPOSABILITY


class CombinatorialBlowupError(CychernException):
    """The chain basis of the requested degree would exceed the cap."""

    def __init__(self, degree: int, estimated: int, cap: int):
        message = (
            f"Chain basis in degree {degree} has {estimated} elements, "
            f"exceeding the cap of {cap}"
        )
        super().__init__(message, code=CychernErrorCode.BLOWUP, module="lincat")
        self.degree = degree
        self.estimated = estimated
        self.cap = cap


class DegreeMismatchError(CychernException):
    """Cochains or forms of incompatible degree."""

    def __init__(self, expected: int, actual: int, what: str = "cochain"):
        message = f"Expected {what} of degree {expected}, got degree {actual}"
        super().__init__(message, code=CychernErrorCode.DEGREE, module="cochain")


class PreconditionError(CychernException):
    """An operation's mathematical hypothesis does not hold for its input."""

    def __init__(self, operation: str, detail: str, residual: Optional[float] = None):
        message = f"Precondition of {operation} violated: {detail}"
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(
            message, code=CychernErrorCode.PRECONDITION, module=operation
        )
        self.residual = residual


class OffGridError(CychernException):
    """A homotopy parameter that is not a sample of the family grid."""

    def __init__(self, t: float):
        super().__init__(
            f"Parameter t={t} is not a grid sample",
            code=CychernErrorCode.OFF_GRID,
            module="homotopy",
        )
        self.t = t


class InsufficientSamplesError(CychernException):
    """A grid segment is too short for the requested stencil or rule."""

    def __init__(self, segment: Sequence[float], required: int, rule: str):
        message = (
            f"Segment [{segment[0]}, {segment[-1]}] has {len(segment)} samples; "
            f"{rule} requires {required}"
        )
        super().__init__(message, code=CychernErrorCode.SAMPLES, module="homotopy")


class QuadratureError(CychernException):
    """A segment piece violates the sample-count rule of the quadrature."""

    def __init__(self, segment: Sequence[float], rule: str):
        message = (
            f"Segment piece [{segment[0]}, {segment[-1]}] with {len(segment)} samples "
            f"does not satisfy {rule}"
        )
        super().__init__(message, code=CychernErrorCode.QUADRATURE, module="homotopy")


class CychernErrorCode:
    """Error code constants for cychern errors."""

    DIMENSION = 1
    DOMAIN = 2
    CATEGORY = 3
    COMPOSABILITY = 4
    BLOWUP = 5
    DEGREE = 6
    PRECONDITION = 7
    OFF_GRID = 8
    SAMPLES = 9
    SCHEMA = 10
    SHAPE = 11
    QUADRATURE = 12
