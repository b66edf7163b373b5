"""
Custom exceptions for the complex hyperbolic toolkit
Provides structured error handling with geometric context
"""
from typing import Optional, Dict, Any


class GeometryToolkitError(Exception):
    """Base exception for the toolkit"""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Serializable error payload"""
        return {
            "error": self.error_code,
            "message": self.message,
            "details": self.details
        }


class ValidationError(GeometryToolkitError):
    """Input validation errors"""
    pass


class NotInGroupError(GeometryToolkitError):
    """Matrix is not unitary for the Hermitian form"""
    pass


class StabilizerElementError(GeometryToolkitError):
    """Isometry fixes q_infinity and has no isometric sphere"""
    pass


class DegenerateConfigurationError(GeometryToolkitError):
    """Coincident points, repeated eigenvalues and similar degeneracies"""
    pass


class ProcessingError(GeometryToolkitError):
    """Numerical procedure did not produce the expected structure"""
    pass


# Error factories
def validation_error(message: str, details: Optional[Dict[str, Any]] = None) -> ValidationError:
    """Create validation error"""
    return ValidationError(message, error_code="ValidationError", details=details)


def processing_error(message: str, details: Optional[Dict[str, Any]] = None) -> ProcessingError:
    """Create processing error"""
    return ProcessingError(message, error_code="ProcessingError", details=details)


def not_in_group_error(residual: float, form: str) -> NotInGroupError:
    """Create SU(H) membership error carrying the unitarity residual"""
    return NotInGroupError(
        f"Matrix is not in SU(H) for the {form} form (residual {residual:.3e})",
        details={"residual": residual, "form": form}
    )


def degenerate_error(what: str, details: Optional[Dict[str, Any]] = None) -> DegenerateConfigurationError:
    """Create degenerate configuration error"""
    return DegenerateConfigurationError(f"Degenerate configuration: {what}", details=details)
