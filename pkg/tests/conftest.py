"""
Shared fixtures for the toolkit test-suite
"""
import math

import numpy as np
import pytest
from click.testing import CliRunner

from core.audit import AuditLogger
from models.geometry import BALL, SIEGEL, ProjectivePoint
from services.trigroup import trigroup_service


@pytest.fixture(autouse=True)
def quiet_audit():
    """Audit records go to stderr; keep test output readable"""
    previous = AuditLogger.enabled
    AuditLogger.enabled = False
    yield
    AuditLogger.enabled = previous


@pytest.fixture
def params_3_1():
    """n = 3, t = 1: (y, z) = (4/5, 2/5)"""
    return trigroup_service.params_from_t(3, 1.0)


@pytest.fixture
def ball_origin():
    return ProjectivePoint(np.array([0.0, 0.0, 1.0]), BALL)


@pytest.fixture
def q_infinity():
    return ProjectivePoint(np.array([1.0, 0.0, 0.0]), SIEGEL)


@pytest.fixture
def runner():
    return CliRunner()


def ball_boundary_point(a: float, b: float, c: float) -> ProjectivePoint:
    """(e^{ia} cos b, e^{ic} sin b, 1) on the unit sphere"""
    return ProjectivePoint(np.array([np.exp(1j * a) * math.cos(b), np.exp(1j * c) * math.sin(b), 1.0]),
                           BALL)
