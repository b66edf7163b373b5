"""
Immutable geometric value types
Carry numpy arrays, so they are plain frozen dataclasses rather than pydantic models
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

SQRT2 = np.sqrt(2.0)


class FormKind(str, Enum):
    """Which standard Hermitian form a vector is measured against"""
    BALL = "ball"
    SIEGEL = "siegel"


_FORM_MATRICES = {
    FormKind.BALL: np.diag([1.0, 1.0, -1.0]).astype(complex),
    FormKind.SIEGEL: np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex),
}

# Cayley transform between the two models; it is its own inverse
CAYLEY = np.array(
    [[1 / SQRT2, 0, 1 / SQRT2],
     [0, 1, 0],
     [1 / SQRT2, 0, -1 / SQRT2]],
    dtype=complex,
)


@dataclass(frozen=True)
class HermitianForm:
    """Signature (2,1) form: H1 = diag(1,1,-1) or the antidiagonal H2"""
    kind: FormKind

    @property
    def matrix(self) -> np.ndarray:
        return _FORM_MATRICES[self.kind].copy()

    def other(self) -> "HermitianForm":
        return HermitianForm(FormKind.SIEGEL if self.kind == FormKind.BALL else FormKind.BALL)


BALL = HermitianForm(FormKind.BALL)
SIEGEL = HermitianForm(FormKind.SIEGEL)


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A nonzero complex 3-vector up to scale, tagged with its form"""
    lift: np.ndarray
    form: HermitianForm = SIEGEL

    def __post_init__(self):
        lift = np.asarray(self.lift, dtype=complex).reshape(3)
        object.__setattr__(self, "lift", lift)

    def normalized(self) -> np.ndarray:
        """Lift scaled so its largest-modulus coordinate equals 1"""
        idx = int(np.argmax(np.abs(self.lift)))
        return self.lift / self.lift[idx]

    def standard_lift(self) -> np.ndarray:
        """Lift with last coordinate 1"""
        return self.lift / self.lift[2]

    def with_lift(self, lift: np.ndarray) -> "ProjectivePoint":
        return ProjectivePoint(lift, self.form)


Q_INFINITY = ProjectivePoint(np.array([1.0, 0.0, 0.0]), SIEGEL)


@dataclass(frozen=True, eq=False)
class Isometry:
    """3x3 complex matrix in SU(H) for the attached form"""
    matrix: np.ndarray
    form: HermitianForm = SIEGEL

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex).reshape(3, 3))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ other.matrix, self.form)

    def __call__(self, p: ProjectivePoint) -> ProjectivePoint:
        return ProjectivePoint(self.matrix @ p.lift, p.form)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def inverse(self) -> "Isometry":
        """H^-1 M* H, valid for both standard forms (H^-1 = H)"""
        h = self.form.matrix
        return Isometry(h @ self.matrix.conj().T @ h, self.form)

    def power(self, k: int) -> "Isometry":
        base = self if k >= 0 else self.inverse()
        return Isometry(np.linalg.matrix_power(base.matrix, abs(k)), self.form)


@dataclass(frozen=True)
class HeisenbergPoint:
    """Boundary point [z, t] of the Heisenberg group"""
    z: complex
    t: float

    def as_horo(self) -> "HoroPoint":
        return HoroPoint(self.z, self.t, 0.0)


@dataclass(frozen=True)
class HoroPoint:
    """Horospherical coordinates [z, t, u] with u >= 0"""
    z: complex
    t: float
    u: float = 0.0

    @property
    def heisenberg(self) -> HeisenbergPoint:
        return HeisenbergPoint(self.z, self.t)


@dataclass(frozen=True)
class CyganSphere:
    """Cygan sphere S_c(r)"""
    center: HeisenbergPoint
    radius: float


@dataclass(frozen=True)
class GeoCoord:
    """Geographic coordinates on a Cygan sphere of radius r centred at the origin"""
    alpha: float
    beta: float
    omega: float
    r: float = 1.0


@dataclass(frozen=True)
class EllipticAngles:
    alpha: float
    beta: float

    @property
    def regular(self) -> bool:
        two_pi = 2 * np.pi
        a, b = self.alpha % two_pi, self.beta % two_pi
        return a != 0.0 and b != 0.0 and a != b

    @property
    def real(self) -> bool:
        return bool(np.isclose((self.alpha + self.beta) % (2 * np.pi), 0.0)
                    or np.isclose((self.alpha + self.beta) % (2 * np.pi), 2 * np.pi))


@dataclass(frozen=True)
class TorusPoint:
    """Siegel boundary point (kappa1, kappa2, 1)"""
    kappa1: complex
    kappa2: complex

    @property
    def lift(self) -> np.ndarray:
        return np.array([self.kappa1, self.kappa2, 1.0], dtype=complex)

    @property
    def point(self) -> ProjectivePoint:
        return ProjectivePoint(self.lift, SIEGEL)


@dataclass(frozen=True)
class RCircleLine:
    """Affine line {[x e^{i theta0} + x0 + i y0, v0 + 2x y0 cos theta0 - 2x x0 sin theta0]}"""
    theta0: float
    x0: float
    y0: float
    v0: float
    Cz: complex
    Ct: float

    def point_at(self, x: float) -> HeisenbergPoint:
        z = x * np.exp(1j * self.theta0) + self.x0 + 1j * self.y0
        t = self.v0 + 2 * x * self.y0 * np.cos(self.theta0) - 2 * x * self.x0 * np.sin(self.theta0)
        return HeisenbergPoint(complex(z), float(t))


@dataclass(frozen=True)
class DiskCoords:
    psi1: float
    psi2: float
    X: float
    Y: float


@dataclass(frozen=True)
class WCoeffs:
    """Coefficients of W(X,Y) = c22 X^2Y^2 + c20 X^2 + c02 Y^2 + 2 c11 XY + c00"""
    c22: float
    c20: float
    c02: float
    c11: float
    c00: float
    theta1: float
    theta2: float

    def __call__(self, X, Y):
        return (self.c22 * X**2 * Y**2 + self.c20 * X**2 + self.c02 * Y**2
                + 2 * self.c11 * X * Y + self.c00)


@dataclass(frozen=True)
class QCoeffs:
    """Coefficients of Q(X,Y) = c22q X^2Y^2 + c20q X^2 + c02q Y^2 + 2 c11q XY"""
    c22q: float
    c20q: float
    c02q: float
    c11q: float
    theta1: float
    theta2: float
    theta3: float
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None

    @property
    def reduced(self) -> bool:
        return self.a is not None

    def __call__(self, X, Y):
        return (self.c22q * X**2 * Y**2 + self.c20q * X**2 + self.c02q * Y**2
                + 2 * self.c11q * X * Y)


@dataclass(frozen=True, eq=False)
class CrossingArc:
    """One of the four arcs from the origin to a point of {W = 0}"""
    eps: int
    tau: int
    sigma: int
    X: np.ndarray
    Y: np.ndarray


@dataclass(frozen=True, eq=False)
class Crossing:
    theta1: float
    theta2: float
    theta3: float
    origin: Tuple[float, float] = (0.0, 0.0)
    boundary_points: Tuple[Tuple[float, float], ...] = ()
    arcs: Tuple[CrossingArc, ...] = ()
    singular: bool = False


@dataclass(frozen=True)
class TriangleParams:
    """Representation parameters of the (n, inf, inf) triangle group"""
    n: int
    t: float
    y: float
    z: float

    @property
    def angular(self) -> float:
        return float(2 * np.arctan(self.t))


@dataclass(frozen=True)
class SphereFamily:
    """Radii r_j (index j-1) and requested centres c_{j,k}"""
    params: TriangleParams
    radii: Tuple[float, ...]
    centers: dict = field(default_factory=dict)

    def radius(self, j: int) -> float:
        return self.radii[j - 1]
