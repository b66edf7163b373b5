"""
Heisenberg group boundary geometry
Group law, stabilizer of q_infinity, Cygan metrics, geographic coordinates and isometric spheres
"""
import logging
from typing import Optional, Union

import numpy as np

from config import settings
from core.exceptions import StabilizerElementError, validation_error
from models.geometry import (
    CAYLEY,
    SIEGEL,
    SQRT2,
    CyganSphere,
    FormKind,
    GeoCoord,
    HeisenbergPoint,
    HoroPoint,
    Isometry,
    ProjectivePoint,
)
from models.schemas import SphereSide, StabilizerKind

logger = logging.getLogger(__name__)

H2 = SIEGEL.matrix
# relative size below which a Hermitian product is rounding noise
ROUNDING = 64.0 * np.finfo(float).eps
BoundaryLike = Union[HeisenbergPoint, HoroPoint]


def heis_mul(p: HeisenbergPoint, q: HeisenbergPoint) -> HeisenbergPoint:
    """[z,t].[z',t'] = [z+z', t+t'+2 Im(z conj(z'))]"""
    z, w = complex(p.z), complex(q.z)
    return HeisenbergPoint(z + w, float(p.t + q.t + 2.0 * (z * w.conjugate()).imag))


def heis_inverse(p: HeisenbergPoint) -> HeisenbergPoint:
    return HeisenbergPoint(-complex(p.z), -float(p.t))


def translation_matrix(z: complex, t: float) -> np.ndarray:
    z = complex(z)
    return np.array(
        [[1.0, -z.conjugate(), (-abs(z) ** 2 + 1j * t) / 2.0],
         [0.0, 1.0, z],
         [0.0, 0.0, 1.0]],
        dtype=complex,
    )


def lift_from_horo(p: BoundaryLike) -> np.ndarray:
    """Standard lift ((-|z|^2 - u + i t)/2, z, 1)"""
    u = p.u if isinstance(p, HoroPoint) else 0.0
    z = complex(p.z)
    return np.array([(-abs(z) ** 2 - u + 1j * p.t) / 2.0, z, 1.0], dtype=complex)


def _as_horo(p: BoundaryLike) -> HoroPoint:
    return p if isinstance(p, HoroPoint) else p.as_horo()


class HeisenbergService:
    """Boundary coordinates and Cygan geometry of the Siegel domain"""

    def __init__(self, tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.tol

    # Coordinates

    def horo_from_lift(self, p: Union[ProjectivePoint, np.ndarray]) -> HoroPoint:
        """
        Horospherical coordinates of a Siegel point.

        Raises:
            ValidationError: The point is q_infinity
        """
        lift = p.lift if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=complex)
        if abs(lift[2]) <= self.tol * np.abs(lift).max():
            raise validation_error("q_infinity has no horospherical coordinates")
        p1, z = lift[0] / lift[2], lift[1] / lift[2]
        u = float(-2.0 * p1.real - abs(z) ** 2)
        if abs(u) <= self.tol * max(1.0, abs(p1)):
            u = 0.0
        return HoroPoint(complex(z), float(2.0 * p1.imag), u)

    def point(self, p: BoundaryLike) -> ProjectivePoint:
        return ProjectivePoint(lift_from_horo(p), SIEGEL)

    def apply_to_horo(self, g: Isometry, p: BoundaryLike) -> HoroPoint:
        """Action of a Siegel isometry in horospherical coordinates"""
        return self.horo_from_lift(g.matrix @ lift_from_horo(p))

    # Stabilizer of q_infinity

    def stabilizer_isometry(self, kind: StabilizerKind, z: complex = 0.0, t: float = 0.0,
                            theta: float = 0.0, lam: float = 1.0) -> Isometry:
        """
        Heisenberg translation T_[z,t], rotation R_theta or dilation D_lambda.

        Raises:
            ValidationError: Dilation with lambda = 0
        """
        kind = StabilizerKind(kind)
        if kind == StabilizerKind.TRANSLATION:
            m = translation_matrix(z, t)
        elif kind == StabilizerKind.ROTATION:
            m = np.diag([1.0, np.exp(1j * theta), 1.0])
        else:
            if lam == 0:
                raise validation_error("Dilation factor must be nonzero")
            m = np.diag([lam, 1.0, 1.0 / lam]).astype(complex)
        return Isometry(m, SIEGEL)

    def translate(self, center: HeisenbergPoint, p: BoundaryLike) -> HoroPoint:
        """T_center applied to p"""
        h = _as_horo(p)
        moved = heis_mul(center, h.heisenberg)
        return HoroPoint(moved.z, moved.t, h.u)

    # Metrics

    def cygan_distance(self, p: BoundaryLike, q: BoundaryLike) -> float:
        """
        Extended Cygan metric
        | |z-w|^2 + |u-v| - i(t - s + 2 Im(z conj w)) |^(1/2).
        """
        p, q = _as_horo(p), _as_horo(q)
        z, w = complex(p.z), complex(q.z)
        value = (abs(z - w) ** 2 + abs(p.u - q.u)
                 - 1j * (p.t - q.t + 2.0 * (z * w.conjugate()).imag))
        return float(np.sqrt(abs(value)))

    def frame_matrix(self, q_ball: ProjectivePoint) -> np.ndarray:
        """
        Composite H2 . T_q . C sending the null ball point q_ball to q_infinity,
        where q = C(q_ball) = (kappa1, kappa2, 1) and T_q moves q to the origin.
        """
        kappa1, kappa2 = self.siegel_kappa(q_ball)
        t_q = translation_matrix(-kappa2, -2.0 * kappa1.imag)
        return H2 @ t_q @ CAYLEY

    def siegel_frame_map(self, q_ball: ProjectivePoint) -> Isometry:
        """frame_matrix as a map into the Siegel model; ball lifts go in, Siegel lifts come out"""
        return Isometry(self.frame_matrix(q_ball), SIEGEL)

    def siegel_kappa(self, q_ball: ProjectivePoint) -> tuple[complex, complex]:
        q = CAYLEY @ q_ball.lift
        if abs(q[2]) <= self.tol * np.abs(q).max():
            raise validation_error("q_ball must not correspond to q_infinity")
        q = q / q[2]
        return complex(q[0]), complex(q[1])

    def pullback_cygan_distance(self, omega: ProjectivePoint, omega_prime: ProjectivePoint,
                                q_ball: ProjectivePoint) -> float:
        """
        Closed-form pullback Cygan distance on the ball model.

        Args:
            omega: Ball point (one of the two should be ideal)
            omega_prime: Ball point
            q_ball: Null ball point sent to q_infinity

        Returns:
            |4 <w,w'> / (D(w) conj(D(w')))|^(1/2)

        Raises:
            ValidationError: Either argument coincides with q_ball
        """
        kappa1, kappa2 = self.siegel_kappa(q_ball)

        def denominator(w: np.ndarray) -> complex:
            return complex(w[0] + 1 + SQRT2 * kappa2.conjugate() * w[1]
                           + kappa1.conjugate() * (w[0] - 1))

        w = omega.standard_lift()
        w2 = omega_prime.standard_lift()
        d1, d2 = denominator(w), denominator(w2)
        if min(abs(d1), abs(d2)) <= self.tol:
            raise validation_error("Pullback Cygan distance is undefined at q_ball")
        inner = complex(w2.conj() @ np.diag([1.0, 1.0, -1.0]) @ w)
        if abs(inner) <= ROUNDING * np.linalg.norm(w) * np.linalg.norm(w2):
            return 0.0
        return float(np.sqrt(abs(4.0 * inner / (d1 * d2.conjugate()))))

    def pullback_cygan_composite(self, omega: ProjectivePoint, omega_prime: ProjectivePoint,
                                 q_ball: ProjectivePoint) -> float:
        """Same distance computed by pushing both points through the frame matrix"""
        m = self.frame_matrix(q_ball)
        return self.cygan_distance(self.horo_from_lift(m @ omega.lift),
                                   self.horo_from_lift(m @ omega_prime.lift))

    # Isometric spheres

    def isometric_sphere(self, g: Isometry) -> CyganSphere:
        """
        Centre g^-1(q_infinity) = [conj(g32)/conj(g31), 2 Im(conj(g33)/conj(g31))],
        radius sqrt(2/|g31|), for the det-normalized matrix.

        Raises:
            StabilizerElementError: g fixes q_infinity
        """
        m = self._normalized(g)
        g31, g32, g33 = m[2, 0], m[2, 1], m[2, 2]
        if abs(g31) <= self.tol * max(1.0, np.abs(m).max()):
            raise StabilizerElementError(
                "Isometry fixes q_infinity and has no isometric sphere",
                details={"g31": abs(g31)},
            )
        center = HeisenbergPoint(complex(np.conj(g32) / np.conj(g31)),
                                 float(2.0 * (np.conj(g33) / np.conj(g31)).imag))
        return CyganSphere(center=center, radius=float(np.sqrt(2.0 / abs(g31))))

    def sphere_side(self, g: Isometry, p: Union[ProjectivePoint, BoundaryLike]) -> SphereSide:
        """Compare |<p, q_inf>| with |<p, g^-1 q_inf>|; larger first term means inside"""
        lift = p.lift if isinstance(p, ProjectivePoint) else lift_from_horo(p)
        m = self._normalized(g)
        preimage = np.conj(m[2, ::-1])
        a = abs(lift[2])
        b = abs(preimage.conj() @ H2 @ lift)
        if abs(a - b) <= self.tol * max(a, b):
            return SphereSide.ON
        return SphereSide.INSIDE if a > b else SphereSide.OUTSIDE

    def _normalized(self, g: Isometry) -> np.ndarray:
        if g.form.kind != FormKind.SIEGEL:
            raise validation_error("Isometric spheres are defined in the Siegel model")
        det = complex(np.linalg.det(g.matrix))
        return g.matrix / det ** (1.0 / 3.0)

    # Geographic coordinates

    def geographic_point(self, gc: GeoCoord) -> ProjectivePoint:
        """
        Standard lift (-r^2 e^{-i alpha}/2, r omega e^{i(beta - alpha/2)}, 1) on S_[0,0](r).

        Raises:
            ValidationError: |omega| > sqrt(cos alpha)
        """
        if not -np.pi / 2 - self.tol <= gc.alpha <= np.pi / 2 + self.tol:
            raise validation_error("alpha must lie in [-pi/2, pi/2]", {"alpha": gc.alpha})
        bound = np.sqrt(max(np.cos(gc.alpha), 0.0))
        if abs(gc.omega) > bound + self.tol:
            raise validation_error("Geographic omega exceeds sqrt(cos alpha)",
                                   {"omega": gc.omega, "bound": float(bound)})
        r = gc.r
        lift = np.array([-r * r * np.exp(-1j * gc.alpha) / 2.0,
                         r * gc.omega * np.exp(1j * (gc.beta - gc.alpha / 2.0)),
                         1.0], dtype=complex)
        return ProjectivePoint(lift, SIEGEL)

    def ideal_geographic_lifts(self, alpha: np.ndarray, phi: np.ndarray, r: float,
                               center: Optional[HeisenbergPoint] = None) -> np.ndarray:
        """
        Vectorized ideal points of S_center(r): omega e^{i beta} = sqrt(cos alpha) e^{i phi}.
        Returns lifts as rows.
        """
        alpha = np.asarray(alpha, dtype=float)
        phi = np.asarray(phi, dtype=float)
        lifts = np.stack([
            -r * r * np.exp(-1j * alpha) / 2.0,
            r * np.sqrt(np.clip(np.cos(alpha), 0.0, None)) * np.exp(1j * (phi - alpha / 2.0)),
            np.ones_like(alpha, dtype=complex),
        ], axis=-1)
        if center is not None:
            lifts = lifts @ translation_matrix(center.z, center.t).T
        return lifts


# Global service instance
heis_service = HeisenbergService()
