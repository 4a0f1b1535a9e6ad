"""Exception types shared across the library."""

from __future__ import annotations


class DiracflowError(Exception):
    """Base class for all library errors."""


class ChartMismatchError(DiracflowError):
    """Two fields that must live on the same chart do not."""


class DomainError(DiracflowError):
    """A point lies outside the open set of its chart."""

    def __init__(self, point, message: str = ""):
        self.point = point
        text = message or f"point {list(point)} is outside the chart domain"
        super().__init__(text)


class BackendError(DiracflowError):
    """A field evaluation produced a non-finite or ill-shaped value."""


class StructureError(DiracflowError):
    """Construction data fails a structure axiom (closedness, Jacobi, rank)."""


class AttainabilityError(DiracflowError):
    """No Hamiltonian direction exists at a point for the requested covector."""

    def __init__(self, point, residual: float, tol: float):
        self.point = point
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"covector not attainable at {list(point)}: "
            f"residual {residual:.3e} > tol {tol:.3e}"
        )


class LeafMismatchError(DiracflowError):
    """A velocity (or endpoint pair) is not tangent to the anchor image."""


class SolveDivergenceError(DiracflowError):
    """A Newton or KKT iteration failed to converge."""
