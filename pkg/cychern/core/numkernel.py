"""
Dense complex matrix backbone.

Traces, singular values, Schatten norms and graded commutators on
double-precision complex matrices. Every function returns a fresh array
and never writes into its arguments.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, DomainError

# Type definitions
Mat = np.ndarray
MatLike = Union[np.ndarray, list]

SINGULAR_CLAMP = 1e-12


def as_matrix(data: MatLike) -> Mat:
    """
    Coerce array-like input into a finite 2-D complex128 matrix.

    Args:
        data: nested lists or an ndarray

    Returns:
        A fresh complex matrix

    Raises:
        DimensionError: If the input is not two-dimensional
        DomainError: If any entry is NaN or infinite
    """
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2:
        raise DimensionError("as_matrix", f"expected 2-D input, got {matrix.ndim}-D")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix entries", "non-finite", "finite complex numbers")
    return matrix


@dataclass(frozen=True)
class GradedDims:
    """Dimensions of the even and odd summands of a graded space."""

    d_plus: int
    d_minus: int

    def __post_init__(self) -> None:
        if self.d_plus < 0 or self.d_minus < 0 or self.d_plus + self.d_minus < 1:
            raise DomainError(
                "graded dimensions",
                (self.d_plus, self.d_minus),
                "non-negative counts with positive total",
            )

    @property
    def total(self) -> int:
        return self.d_plus + self.d_minus

    def grading(self) -> Mat:
        """The grading operator ε = diag(I, -I)."""
        signs = np.concatenate([np.ones(self.d_plus), -np.ones(self.d_minus)])
        return np.diag(signs).astype(np.complex128)

    def even_part(self, matrix: Mat) -> Mat:
        """Block-diagonal part of an endomorphism of this space."""
        eps = self.grading()
        return (matrix + eps @ matrix @ eps) / 2

    def odd_part(self, matrix: Mat) -> Mat:
        """Block-off-diagonal part of an endomorphism of this space."""
        eps = self.grading()
        return (matrix - eps @ matrix @ eps) / 2


def trace(matrix: Mat) -> complex:
    """
    Sum of the diagonal entries of a square matrix.

    Raises:
        DimensionError: If the matrix is not square
    """
    rows, cols = np.shape(matrix)
    if rows != cols:
        raise DimensionError("trace", f"non-square {rows}x{cols} matrix")
    return complex(np.trace(matrix))


def singular_values(matrix: Mat) -> np.ndarray:
    """
    Singular values in decreasing order.

    Computed as square roots of the eigenvalues of T*T with the Hermitian
    eigensolver; values below SINGULAR_CLAMP times the largest are set to 0.
    The result has length min(rows, cols).
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    rows, cols = matrix.shape
    size = min(rows, cols)
    if size == 0:
        return np.zeros(0)
    gram = matrix.conj().T @ matrix if cols <= rows else matrix @ matrix.conj().T
    eigenvalues = scipy.linalg.eigh(gram, eigvals_only=True)
    values = np.sqrt(np.clip(eigenvalues, 0.0, None))[::-1][:size]
    top = values[0] if values.size else 0.0
    values[values < SINGULAR_CLAMP * top] = 0.0
    return values


def schatten_norm(matrix: Mat, p: float) -> float:
    """
    Schatten p-norm (Σ μ_n^p)^{1/p}.

    Raises:
        DomainError: If p < 1
    """
    if not np.isfinite(p) or p < 1:
        raise DomainError("Schatten exponent", p, "a finite real p >= 1")
    values = singular_values(matrix)
    if not values.size or values[0] == 0.0:
        return 0.0
    # Scale by the largest value so large exponents do not overflow
    top = values[0]
    return float(top * np.sum((values / top) ** p) ** (1.0 / p))


def graded_commutator(
    f_source: Mat, f_target: Mat, matrix: Mat, degree: int, graded: bool = True
) -> Mat:
    """
    Commutator of the symmetry family with an operator.

    Args:
        f_source: F on the source space of the operator
        f_target: F on the target space of the operator
        matrix: the operator T
        degree: the degree of T (only its parity matters)
        graded: use the sign (-1)^degree; otherwise the plain commutator

    Returns:
        F_Y T - (-1)^degree T F_X, or F_Y T - T F_X when ungraded

    Raises:
        DimensionError: If F_X or F_Y do not fit the operator
    """
    rows, cols = np.shape(matrix)
    if np.shape(f_source) != (cols, cols):
        raise DimensionError(
            "graded_commutator",
            f"source symmetry {np.shape(f_source)} does not act on {cols} columns",
        )
    if np.shape(f_target) != (rows, rows):
        raise DimensionError(
            "graded_commutator",
            f"target symmetry {np.shape(f_target)} does not act on {rows} rows",
        )
    sign = (-1) ** degree if graded else 1
    return f_target @ matrix - sign * (matrix @ f_source)


def block_diag(upper: Mat, lower: Mat) -> Mat:
    """Block-diagonal matrix diag(upper, lower)."""
    return np.asarray(scipy.linalg.block_diag(upper, lower), dtype=np.complex128)


def swap_symmetry(dim: int) -> Mat:
    """The involution exchanging the two copies of a doubled space."""
    identity = np.eye(dim, dtype=np.complex128)
    zero = np.zeros((dim, dim), dtype=np.complex128)
    return np.block([[zero, identity], [identity, zero]])


def max_abs(values: np.ndarray) -> float:
    """Sup-norm, 0 for empty input."""
    return float(np.max(np.abs(values))) if np.size(values) else 0.0
