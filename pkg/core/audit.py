"""
Run auditing and input validation for the toolkit
Emits one JSON record per heavy computation and screens user-supplied parameters
"""
import json
import logging
import math
from datetime import datetime, timezone
from typing import Any, Dict, Optional, Sequence

import numpy as np

# Configure audit logger
audit_logger = logging.getLogger("audit")
audit_logger.setLevel(logging.INFO)
audit_logger.propagate = False

# Create audit log handler if not exists
if not audit_logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter(
        '%(asctime)s - AUDIT - %(levelname)s - %(message)s'
    )
    handler.setFormatter(formatter)
    audit_logger.addHandler(handler)


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars and complex numbers for json.dumps"""
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class AuditLogger:
    """Audit logging for reproducible computations"""

    enabled: bool = True

    @staticmethod
    def log_computation(
        operation: str,
        data_type: str,
        record_count: int = 1,
        processing_time_ms: Optional[int] = None,
        success: bool = True,
        error_message: Optional[str] = None,
        additional_data: Optional[Dict[str, Any]] = None
    ):
        """Log a finished computation"""
        if not AuditLogger.enabled:
            return
        audit_data = {
            "event_type": "computation",
            "operation": operation,
            "data_type": data_type,
            "record_count": record_count,
            "processing_time_ms": processing_time_ms,
            "success": success,
            "error_message": error_message,
            "timestamp": datetime.now(timezone.utc).isoformat()
        }

        if additional_data:
            audit_data["additional_data"] = _jsonable(additional_data)

        audit_logger.info(json.dumps(audit_data))


class InputValidator:
    """Validates user-supplied geometric parameters"""

    @classmethod
    def validate_angle_pair(cls, theta1: float, theta2: float) -> tuple[bool, Optional[str]]:
        """Require 0 < theta1 < theta2 < 2 pi"""
        if not (math.isfinite(theta1) and math.isfinite(theta2)):
            return False, "Angles must be finite"
        if not 0.0 < theta1 < theta2 < 2.0 * math.pi:
            return False, f"Angles must satisfy 0 < theta1 < theta2 < 2pi, got ({theta1}, {theta2})"
        return True, None

    @classmethod
    def validate_third_angle(cls, theta1: float, theta2: float, theta3: float,
                             tol: float = 0.0) -> tuple[bool, Optional[str]]:
        """theta3 in [0, 2 pi] and distinct from theta1, theta2"""
        ok, message = cls.validate_angle_pair(theta1, theta2)
        if not ok:
            return ok, message
        if not (math.isfinite(theta3) and -tol <= theta3 <= 2.0 * math.pi + tol):
            return False, f"theta3 must lie in [0, 2pi], got {theta3}"
        if abs(theta3 - theta1) <= tol or abs(theta3 - theta2) <= tol:
            return False, "theta3 collides with theta1 or theta2"
        return True, None

    @classmethod
    def validate_distinct_angles(cls, angles: Sequence[float]) -> tuple[bool, Optional[str]]:
        """Pairwise distinct angles in (0, 2 pi)"""
        for a in angles:
            if not (math.isfinite(a) and 0.0 < a < 2.0 * math.pi):
                return False, f"Angle {a} outside (0, 2pi)"
        ordered = sorted(angles)
        if any(b - a <= 0.0 for a, b in zip(ordered, ordered[1:])):
            return False, "Angles must be pairwise distinct"
        return True, None

    @classmethod
    def validate_triangle_order(cls, n: int) -> tuple[bool, Optional[str]]:
        """Triangle groups need n >= 3"""
        if not isinstance(n, (int, np.integer)) or n < 3:
            return False, f"n must be an integer >= 3, got {n}"
        return True, None

    @classmethod
    def validate_positive(cls, name: str, value: float) -> tuple[bool, Optional[str]]:
        """Finite and strictly positive"""
        if not (math.isfinite(value) and value > 0.0):
            return False, f"{name} must be positive, got {value}"
        return True, None

    @classmethod
    def validate_matrix(cls, matrix: Any) -> tuple[bool, Optional[str]]:
        """3x3 finite complex matrix"""
        try:
            m = np.asarray(matrix, dtype=complex)
        except (TypeError, ValueError):
            return False, "Matrix entries are not numeric"
        if m.shape != (3, 3):
            return False, f"Matrix must be 3x3, got shape {m.shape}"
        if not np.all(np.isfinite(m)):
            return False, "Matrix contains non-finite entries"
        return True, None

    @classmethod
    def validate_grid(cls, grid: int) -> tuple[bool, Optional[str]]:
        """Sampling grids need at least two nodes"""
        if grid < 2:
            return False, f"grid must be >= 2, got {grid}"
        return True, None
