"""
Elliptic isometries and fixed tori
Normal forms E_{alpha,beta}, the standard torus and its circle foliation,
the real elliptic test and fixed-torus extraction
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from config import settings
from core.exceptions import degenerate_error, validation_error
from models.geometry import (
    BALL,
    CAYLEY,
    SIEGEL,
    CyganSphere,
    EllipticAngles,
    FormKind,
    HeisenbergPoint,
    Isometry,
    ProjectivePoint,
    RCircleLine,
    TorusPoint,
)
from models.schemas import IsometryKind, RealEllipticWitness
from services.cproj import cproj_service
from services.heis import H2, heis_service, translation_matrix

logger = logging.getLogger(__name__)

P_E = ProjectivePoint(np.array([-1.0, 0.0, 1.0]), SIEGEL)
LEAF_KAPPA1 = -(3.0 + 2.0 * np.sqrt(2.0))
LEAF_MODULUS = 2.0 + np.sqrt(2.0)
Q0 = TorusPoint(-1 - 2j, np.sqrt(2.0))

PointLike = Union[ProjectivePoint, TorusPoint]


def _siegel_lift(q: PointLike) -> np.ndarray:
    if isinstance(q, TorusPoint):
        return q.lift
    if q.form.kind != FormKind.SIEGEL:
        raise validation_error("Expected a Siegel-model point")
    return q.lift


@dataclass(frozen=True, eq=False)
class TorusSampler:
    """(phi, theta) -> Q(C_{q(phi)}(theta)) sampling the fixed torus of g"""
    conjugator: Isometry
    theta: float

    def __call__(self, phi: float, theta: float) -> ProjectivePoint:
        leaf = ellip_service.circle_point(ellip_service.torus_leaf(phi), theta)
        return self.conjugator(leaf)


class EllipticService:
    """Normal forms and torus geometry of regular elliptic isometries"""

    def __init__(self, tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.tol

    def elliptic_normal_form(self, ang: EllipticAngles, model: FormKind = FormKind.SIEGEL) -> Isometry:
        """
        E^ball_{alpha,beta} = diag(e^{i alpha}, e^{i beta}, 1), det-normalized; the Siegel
        form is its Cayley conjugate and fixes p_E = [-1, 0, 1].
        """
        ball = np.diag([np.exp(1j * ang.alpha), np.exp(1j * ang.beta), 1.0])
        g = cproj_service.make_isometry(ball, BALL)
        if FormKind(model) == FormKind.BALL:
            return g
        return cproj_service.cayley_conjugate(g)

    def torus_membership(self, q: PointLike) -> bool:
        """|z1 + 1|^2 = 2 |z2|^2 for the standard lift"""
        lift = _siegel_lift(q)
        if abs(lift[2]) <= self.tol * np.abs(lift).max():
            raise validation_error("q_infinity is not tested for torus membership")
        z1, z2 = lift[0] / lift[2], lift[1] / lift[2]
        lhs, rhs = abs(z1 + 1) ** 2, 2.0 * abs(z2) ** 2
        return bool(abs(lhs - rhs) <= 10 * self.tol * max(1.0, lhs, rhs))

    def torus_leaf(self, phi: float) -> TorusPoint:
        """q(phi) = [-(3+2 sqrt2), (2+sqrt2) e^{i phi}, 1]"""
        return TorusPoint(complex(LEAF_KAPPA1), complex(LEAF_MODULUS * np.exp(1j * phi)))

    def circle_point(self, q: PointLike, theta: float) -> ProjectivePoint:
        """C_q(theta) = E_{theta,-theta}(q) from the explicit lift"""
        lift = _siegel_lift(q)
        z1, z2, z3 = lift
        e = np.exp(1j * theta)
        a, b = (z1 + z3) / 2.0, (z1 - z3) / 2.0
        return ProjectivePoint(np.array([a * e + b, z2 / e, a * e - b]), SIEGEL)

    def fixed_lagrangian_invariants(self, ang: EllipticAngles, q: PointLike) -> tuple[float, float, float]:
        """Cartan invariants (p_E, q, Eq), (p_E, q, E^2 q), (q, Eq, E^2 q)"""
        e = self.elliptic_normal_form(ang)
        p = ProjectivePoint(_siegel_lift(q), SIEGEL)
        eq = e(p)
        e2q = e(eq)
        return (cproj_service.triple_argument(P_E, p, eq),
                cproj_service.triple_argument(P_E, p, e2q),
                cproj_service.cartan_invariant(p, eq, e2q))

    # Real elliptic elements

    def _eigen_data(self, g: Isometry):
        m = cproj_service.make_isometry(g.matrix, g.form).matrix
        vals, vecs = np.linalg.eig(m)
        norms = np.array([cproj_service.hermitian_product(vecs[:, k], vecs[:, k], g.form).real
                          for k in range(3)])
        negative = int(np.argmin(norms))
        if norms[negative] >= 0 or np.sum(norms < 0) != 1:
            raise degenerate_error("elliptic element without a unique negative eigenvector")
        return vals, vecs, norms, negative

    def real_elliptic_test(self, g: Isometry) -> RealEllipticWitness:
        """
        Decide whether a regular elliptic element is real elliptic.

        Args:
            g: Isometry classified as RegularElliptic

        Returns:
            Witness with the rotation angle and the fixed point

        Raises:
            ValidationError: g is not regular elliptic
        """
        cls = cproj_service.classify_isometry(g)
        if cls.kind != IsometryKind.REGULAR_ELLIPTIC:
            raise validation_error("Real elliptic test needs a regular elliptic element",
                                   {"kind": cls.kind.value})
        vals, vecs, _, negative = self._eigen_data(g)
        others = [vals[k] / vals[negative] for k in range(3) if k != negative]
        is_real = abs(others[0] * others[1] - 1.0) <= 1e3 * self.tol
        theta = float(abs(np.angle(others[0])))
        fixed = vecs[:, negative] / vecs[np.argmax(np.abs(vecs[:, negative])), negative]
        return RealEllipticWitness(is_real=bool(is_real), theta=theta,
                                   fixed_point=[(float(c.real), float(c.imag)) for c in fixed])

    def fixed_torus_of(self, g: Isometry) -> TorusSampler:
        """
        Conjugator Q in SU(H2) with Q^-1 g Q = E_{alpha,-alpha} and a sampler of Q(T^2).

        Raises:
            ValidationError: g is not real elliptic
            DegenerateConfigurationError: repeated eigenvalues
        """
        witness = self.real_elliptic_test(g)
        if not witness.is_real:
            raise validation_error("Fixed torus needs a real elliptic element")
        vals, vecs, norms, negative = self._eigen_data(g)
        positive = [k for k in range(3) if k != negative]
        if abs(vals[positive[0]] - vals[positive[1]]) <= 1e3 * self.tol:
            raise degenerate_error("repeated eigenvalues in fixed-torus extraction")
        v = np.column_stack([
            vecs[:, positive[0]] / np.sqrt(norms[positive[0]]),
            vecs[:, positive[1]] / np.sqrt(norms[positive[1]]),
            vecs[:, negative] / np.sqrt(-norms[negative]),
        ])
        q = v @ CAYLEY
        det = complex(np.linalg.det(q))
        v[:, 2] *= np.conj(det) / abs(det)
        conjugator = Isometry(v @ CAYLEY, SIEGEL)
        theta = float(np.angle(vals[positive[0]] / vals[negative]))
        logger.debug("fixed torus conjugator built, rotation %.6f", theta)
        return TorusSampler(conjugator=conjugator, theta=theta)

    # R-circle leaves in the Heisenberg frame of q

    def pushed_circle(self, q: TorusPoint, theta: float) -> HeisenbergPoint:
        """H2 . T_q . C_q(theta), the centre of the sphere of E~_{-theta,theta,q}"""
        t_q = translation_matrix(-q.kappa2, -2.0 * complex(q.kappa1).imag)
        lift = H2 @ t_q @ self.circle_point(q, theta).lift
        return heis_service.horo_from_lift(lift).heisenberg

    def tilde_sphere(self, q: TorusPoint, theta: float) -> CyganSphere:
        """Isometric sphere of the conjugate of E^ball_{-theta,theta} sending q_ball to infinity"""
        q_ball = ProjectivePoint(CAYLEY @ q.lift, BALL)
        frame = heis_service.frame_matrix(q_ball)
        ball = np.diag([np.exp(-1j * theta), np.exp(1j * theta), 1.0])
        g = cproj_service.make_isometry(frame @ ball @ np.linalg.inv(frame), SIEGEL)
        return heis_service.isometric_sphere(g)

    def rcircle_affine_params(self, q: TorusPoint) -> RCircleLine:
        """
        Affine line carrying H2 . T_q . C_q minus q_infinity.

        Raises:
            ValidationError: q on a C-circle leaf (kappa2 = 0) or off the torus
        """
        k1, k2 = complex(q.kappa1), complex(q.kappa2)
        if abs(k2) <= self.tol:
            raise validation_error("Degenerate C-circle leaf: kappa2 = 0")
        if not self.torus_membership(q):
            raise validation_error("Point is not on the standard torus")
        m2 = abs(k2) ** 2
        cz = k2 * (k1 + 3) * 1j / (4.0 * m2)
        ct = -(k1.real + 1.0) / (2.0 * m2)
        base = k2 * (k1 - 1) / (-4.0 * m2)
        v0 = 2.0 * (-k1 / (-4.0 * m2)).imag
        theta0 = float(np.angle(-cz))
        return RCircleLine(theta0=theta0, x0=float(base.real), y0=float(base.imag),
                           v0=float(v0), Cz=complex(cz), Ct=float(ct))

    def line_parameter(self, line: RCircleLine, theta: float) -> float:
        """x = -|C_z| cot(theta/2)"""
        return float(-abs(line.Cz) / np.tan(theta / 2.0))

    def circle_sphere_residual(self, q: PointLike, theta: float, samples: int = 32) -> float:
        """Max |d_Cyg(C_q(phi), c) - r| for the isometric sphere of E_{theta,-theta}"""
        sphere = heis_service.isometric_sphere(
            self.elliptic_normal_form(EllipticAngles(theta, -theta)))
        residual = 0.0
        for phi in np.linspace(0.0, 2 * np.pi, samples, endpoint=False):
            lift = self.circle_point(q, phi).lift
            if abs(lift[2]) <= self.tol * np.abs(lift).max():
                continue
            d = heis_service.cygan_distance(heis_service.horo_from_lift(lift), sphere.center)
            residual = max(residual, abs(d - sphere.radius))
        return residual

    def c_circle_on_sphere_check(self, theta: float, samples: int = 32) -> float:
        """Max membership residual of [sqrt2 e^{i phi}, 0] on I(E_{theta,-theta})"""
        if not 0.0 < theta < 2 * np.pi:
            raise validation_error("theta must lie in (0, 2pi)")
        sphere = heis_service.isometric_sphere(
            self.elliptic_normal_form(EllipticAngles(theta, -theta)))
        phis = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        return max(
            abs(heis_service.cygan_distance(HeisenbergPoint(np.sqrt(2.0) * np.exp(1j * phi), 0.0),
                                            sphere.center) - sphere.radius)
            for phi in phis
        )

    def leaf_frame(self, q: PointLike) -> Tuple[complex, complex]:
        """(A, B) with C_q(theta) = (A e^{i theta}, B e^{-i theta}) in the ball model"""
        w = CAYLEY @ self.circle_point(q, 0.0).lift
        return complex(w[0] / w[2]), complex(w[1] / w[2])

    def _distance_to_leaf(self, points: np.ndarray, frame: Tuple[complex, complex]) -> np.ndarray:
        """Exact distance from rows (w1, w2) to the circle (A e^{i theta}, B e^{-i theta})"""
        a, b = frame
        phase = np.exp(1j * np.angle(np.conj(a) * points[:, 0] + b * np.conj(points[:, 1])))
        return np.sqrt(np.abs(points[:, 0] - a * phase) ** 2 + np.abs(points[:, 1] - b / phase) ** 2)

    def leaf_hausdorff(self, q: PointLike, q_prime: PointLike, samples: int = 64) -> float:
        """Hausdorff distance of C_q and C_q' from samples of each measured against the other"""
        frames = self.leaf_frame(q), self.leaf_frame(q_prime)
        theta = np.exp(1j * np.linspace(0.0, 2 * np.pi, samples, endpoint=False))
        directed = []
        for (a, b), other in ((frames[0], frames[1]), (frames[1], frames[0])):
            points = np.column_stack([a * theta, b / theta])
            directed.append(float(self._distance_to_leaf(points, other).max()))
        return max(directed)

    def leaves_coincide(self, q: PointLike, q_prime: PointLike) -> bool:
        """C_q and C_q' are the same circle when their Hausdorff distance is below threshold"""
        return bool(self.leaf_hausdorff(q, q_prime) <= settings.leaf_identity_threshold)

    def leaf_distance(self, q: PointLike, q_prime: PointLike, samples: int = 256) -> float:
        a = self._ball_samples(q, samples)
        b = self._ball_samples(q_prime, samples)
        return float(cKDTree(b).query(a)[0].min())

    def _ball_samples(self, q: PointLike, samples: int) -> np.ndarray:
        rows = []
        for theta in np.linspace(0.0, 2 * np.pi, samples, endpoint=False):
            w = CAYLEY @ self.circle_point(q, theta).lift
            w = w / w[2]
            rows.append([w[0].real, w[0].imag, w[1].real, w[1].imag])
        return np.array(rows)


# Global service instance
ellip_service = EllipticService()
