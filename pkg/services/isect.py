"""
Intersections of the standard isometric spheres I(theta)
Pairwise disks W(X,Y), triple loci Q(X,Y), crossings via the heartsuit quartic,
singular angles, foliation leaves and the geographic pair inequality
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.spatial import cKDTree

from config import settings
from core.audit import AuditLogger, InputValidator
from core.exceptions import ProcessingError, degenerate_error, processing_error, validation_error
from models.geometry import (
    BALL,
    CAYLEY,
    Crossing,
    CrossingArc,
    DiskCoords,
    GeoCoord,
    HeisenbergPoint,
    ProjectivePoint,
    QCoeffs,
    TorusPoint,
    WCoeffs,
)
from services.ellip import Q0, ellip_service
from services.heis import heis_service, translation_matrix

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
Q_BALL = ProjectivePoint(np.array([1 + 1j, -(1 - 1j), 2.0]), BALL)


@dataclass(frozen=True, eq=False)
class Leaf:
    """One sampled crossing of the foliation"""
    theta3: float
    singular: bool
    crossing: Crossing


def _check(result: Tuple[bool, Optional[str]]):
    ok, message = result
    if not ok:
        raise validation_error(message)


def psi_from_cot(x):
    """Inverse of X = cot(psi/2) onto (0, 2 pi)"""
    return 2.0 * np.arctan2(1.0, x)


class IntersectionService:
    """Pairwise, triple and quadruple intersections of the standard spheres"""

    def __init__(self, tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.tol
        self.snap = settings.near_singular_snap
        self.floor = settings.coefficient_floor

    # Standard spheres

    def standard_sphere_side(self, omega: ProjectivePoint, theta: float) -> float:
        """
        |(1-i) w1 e^{-i theta} - (1+i) w2 e^{i theta} - 2| - |(1-i) w1 - (1+i) w2 - 2|.

        Negative inside I(theta), zero on it, positive outside.

        Raises:
            ValidationError: omega is the point q_ball
        """
        w = omega.standard_lift()
        return float(self.standard_sphere_residuals(w[None, :2], theta)[0])

    def standard_sphere_residuals(self, w: np.ndarray, theta: float) -> np.ndarray:
        """Vectorized residuals for rows (w1, w2) of normalized ball coordinates"""
        a = (1 - 1j) * w[:, 0]
        b = (1 + 1j) * w[:, 1]
        base = np.abs(a - b - 2.0)
        if np.any(base <= self.tol):
            raise validation_error("The standard sphere residual is undefined at q_ball")
        return np.abs(a * np.exp(-1j * theta) - b * np.exp(1j * theta) - 2.0) - base

    def standard_sphere_radius(self, theta: float) -> float:
        return float(1.0 / (2.0 * np.sin(theta / 2.0)))

    # Pairwise intersections

    def w_coefficients(self, theta1: float, theta2: float) -> WCoeffs:
        """
        Coefficients of the quartic W describing I(theta1) cap I(theta2).

        Raises:
            ValidationError: unless 0 < theta1 < theta2 < 2 pi
        """
        _check(InputValidator.validate_angle_pair(theta1, theta2))
        d = theta1 - theta2
        s1, s2, sd = np.sin(theta1 / 2) ** 2, np.sin(theta2 / 2) ** 2, np.sin(d / 2) ** 2
        c1, c2 = np.cos(theta1), np.cos(theta2)
        return WCoeffs(
            c22=float(2 * sd * (6 - np.cos(d) - np.cos(theta1 + theta2) - 2 * c1 - 2 * c2)),
            c20=float(2 * s2 * (6 - 2 * np.cos(d) - np.cos(2 * theta1 - theta2) - 2 * c1 - c2)),
            c02=float(2 * s1 * (6 - 2 * np.cos(d) - np.cos(theta1 - 2 * theta2) - c1 - 2 * c2)),
            c11=float(-16 * s1 * s2),
            c00=float(-16 * s1 * s2 * sd),
            theta1=theta1,
            theta2=theta2,
        )

    def w_eval(self, wc: WCoeffs, X, Y):
        return wc(X, Y)

    def w_tilde(self, theta1: float, theta2: float, psi1, psi2):
        """The same disk in (psi1, psi2); non-positive exactly on the closed ball"""
        c1, c2, c12 = np.cos(theta1) - 1, np.cos(theta2) - 1, np.cos(theta1 - theta2) - 1
        return (c1 ** 2 + c2 ** 2 + c12 ** 2
                - 2 * c1 * c2 * np.cos(psi1 - psi2)
                + 2 * c2 * c12 * np.cos(psi1)
                + 2 * c1 * c12 * np.cos(psi2))

    def psi_from_ball(self, omega: ProjectivePoint, theta1: float, theta2: float) -> DiskCoords:
        """(psi1, psi2) of a point of I(theta1) cap I(theta2)"""
        w = omega.standard_lift()
        a, b = (1 - 1j) * w[0], (1 + 1j) * w[1]
        base = a - b - 2.0
        if abs(base) <= self.tol:
            raise validation_error("psi coordinates are undefined at q_ball")
        psis = []
        for theta in (theta1, theta2):
            e = -(a * np.exp(-1j * theta) - b * np.exp(1j * theta) - 2.0) / base
            psis.append(float(np.angle(e) % TWO_PI))
        return DiskCoords(psis[0], psis[1], float(1 / np.tan(psis[0] / 2)),
                          float(1 / np.tan(psis[1] / 2)))

    def ball_from_psi(self, psi1: float, psi2: float, theta1: float, theta2: float) -> ProjectivePoint:
        """
        Solve w1 u_j - w2 v_j = 2(e^{i psi_j} + 1) with u_j = (1-i)(e^{-i theta_j} + e^{i psi_j}),
        v_j = (1+i)(e^{i theta_j} + e^{i psi_j}).

        Raises:
            DegenerateConfigurationError: the linear system is singular
        """
        rows, rhs = [], []
        for theta, psi in ((theta1, psi1), (theta2, psi2)):
            e = np.exp(1j * psi)
            rows.append([(1 - 1j) * (np.exp(-1j * theta) + e), -(1 + 1j) * (np.exp(1j * theta) + e)])
            rhs.append(2.0 * (e + 1.0))
        matrix = np.array(rows)
        if abs(np.linalg.det(matrix)) <= self.tol:
            raise degenerate_error("psi coordinates outside the parameterized region",
                                   {"psi1": psi1, "psi2": psi2})
        w = np.linalg.solve(matrix, np.array(rhs))
        return ProjectivePoint(np.array([w[0], w[1], 1.0]), BALL)

    # Triple intersections

    def q_coefficients(self, theta1: float, theta2: float, theta3: float) -> QCoeffs:
        """
        Coefficients of Q(X,Y) and the reduced (a, b, c) when c22q is nonzero.

        Raises:
            ValidationError: angle range violations
        """
        _check(InputValidator.validate_angle_pair(theta1, theta2))
        if not -self.tol <= theta3 <= TWO_PI + self.tol:
            raise validation_error("theta3 must lie in [0, 2pi]", {"theta3": theta3})
        return self._q_raw(theta1, theta2, theta3)

    def _q_raw(self, theta1: float, theta2: float, theta3: float) -> QCoeffs:
        c22q = np.sin((theta1 - theta2) / 2) ** 2 * np.sin((theta3 - theta1 - theta2) / 2)
        c20q = np.sin(theta2 / 2) ** 2 * np.sin((theta1 - theta2 + theta3) / 2)
        c02q = np.sin(theta1 / 2) ** 2 * np.sin((theta2 - theta1 + theta3) / 2)
        c11q = -np.sin(theta1 / 2) * np.sin(theta2 / 2) * np.sin(theta3 / 2)
        values = [0.0 if abs(v) < self.floor else float(v) for v in (c22q, c20q, c02q, c11q)]
        c22q, c20q, c02q, c11q = values
        reduced = {}
        if abs(c22q) > self.tol:
            reduced = dict(a=-c20q / c22q, b=-c11q / c22q, c=-c02q / c22q)
        return QCoeffs(c22q, c20q, c02q, c11q, theta1, theta2, theta3, **reduced)

    def q_hat(self, theta1: float, theta2: float, theta3: float, X, Y):
        """Q-hat = 64 sin(theta3/2) sin((theta1-theta3)/2) sin((theta2-theta3)/2) Q"""
        qc = self._q_raw(theta1, theta2, theta3)
        scale = 64 * (np.sin(theta3 / 2) * np.sin((theta1 - theta3) / 2)
                      * np.sin((theta2 - theta3) / 2))
        return scale * qc(X, Y)

    def heartsuit_polynomial(self, wc: WCoeffs, qc: QCoeffs) -> Polynomial:
        """
        Quartic in the slope k = Y/X whose roots are the slopes of {Q = 0} cap {W = 0}.
        """
        if qc.c22q == 0.0:
            raise degenerate_error("heartsuit needs c22q != 0")
        q = Polynomial([qc.c20q, 2 * qc.c11q, qc.c02q])
        w = Polynomial([wc.c20, 2 * wc.c11, wc.c02])
        return (wc.c22 / qc.c22q ** 2) * q ** 2 - (1.0 / qc.c22q) * w * q + wc.c00 * Polynomial([0, 0, 1])

    def heartsuit(self, theta1: float, theta2: float, theta3: float, k: float) -> float:
        wc = self.w_coefficients(theta1, theta2)
        qc = self.q_coefficients(theta1, theta2, theta3)
        return float(self.heartsuit_polynomial(wc, qc)(k))

    def singular_angles(self, theta1: float, theta2: float) -> List[float]:
        """{0, 2pi, theta2-theta1, 2pi-(theta2-theta1), theta1+theta2, theta1+theta2-2pi} in [0, 2pi]"""
        _check(InputValidator.validate_angle_pair(theta1, theta2))
        candidates = [0.0, TWO_PI, theta2 - theta1, TWO_PI - (theta2 - theta1),
                      theta1 + theta2, theta1 + theta2 - TWO_PI]
        kept: List[float] = []
        for value in sorted(v for v in candidates if -self.tol <= v <= TWO_PI + self.tol):
            if not kept or value - kept[-1] > self.tol:
                kept.append(float(min(max(value, 0.0), TWO_PI)))
        return kept

    def branch_table(self, qc: QCoeffs) -> dict:
        """
        Branch curves gamma_{eps,tau,sigma} present for the sign pattern of (a, b, c),
        with the upper end of their chi-domain (inf for [0, inf)).
        """
        if not qc.reduced:
            return {}
        a, b, c = qc.a, qc.b, qc.c
        labels: List[Tuple[int, int]] = []
        upper = np.inf
        if a > 0 and c < 0:
            labels = [(1, 1), (1, -1)]
        elif a < 0 and c > 0:
            labels = [(-1, 1), (-1, -1)]
        elif a > 0 and b < 0 and c > 0:
            labels = [(1, 1), (-1, 1)]
        elif a < 0 and b > 0 and c < 0:
            labels = [(1, 1), (-1, 1)]
            upper = 2 * b - 2 * np.sqrt(a * c)
        elif a < 0 and b < 0 and c < 0:
            labels = [(1, -1), (-1, -1)]
            upper = -(2 * b + 2 * np.sqrt(a * c))
        return {(eps, tau, sigma): upper for eps in (1, -1) for tau, sigma in labels}

    # Crossings

    def crossing_points(self, theta1: float, theta2: float, theta3: float) -> Crossing:
        """
        Triple intersection I(theta1) cap I(theta2) cap I(theta3) as a crossing.

        Args:
            theta1: First angle
            theta2: Second angle, theta1 < theta2
            theta3: Third angle in [0, 2pi], distinct from theta1 and theta2

        Returns:
            Crossing with four boundary points on {W = 0} and four sampled arcs

        Raises:
            ValidationError: theta3 collides with theta1 or theta2
            ProcessingError: the locus does not meet {W = 0} in four points
        """
        _check(InputValidator.validate_third_angle(theta1, theta2, theta3, self.tol))
        return self._crossing(theta1, theta2, theta3)

    def _crossing(self, theta1: float, theta2: float, theta3: float, singular: bool = False) -> Crossing:
        for s in self.singular_angles(theta1, theta2):
            if abs(theta3 - s) <= self.snap:
                theta3 = s
                break
        wc = self.w_coefficients(theta1, theta2)
        qc = self._q_raw(theta1, theta2, theta3)
        points = self._boundary_points(wc, qc)
        if len(points) != 4:
            raise processing_error(
                f"Expected 4 boundary points, found {len(points)}",
                {"theta1": theta1, "theta2": theta2, "theta3": theta3},
            )
        arcs = tuple(self._arc(wc, qc, p) for p in points)
        return Crossing(theta1, theta2, theta3, boundary_points=tuple(points), arcs=arcs,
                        singular=singular)

    def _ray_exit(self, wc: WCoeffs, dx: float, dy: float) -> float:
        """s > 0 with W(s dx, s dy) = 0 for a unit direction"""
        quartic = wc.c22 * dx * dx * dy * dy
        quadratic = wc.c20 * dx * dx + wc.c02 * dy * dy + 2 * wc.c11 * dx * dy
        if quartic <= self.floor:
            sigma = -wc.c00 / quadratic
        else:
            sigma = (-quadratic + np.sqrt(quadratic ** 2 - 4 * quartic * wc.c00)) / (2 * quartic)
        return float(np.sqrt(sigma))

    def _line_directions(self, qc: QCoeffs) -> List[Tuple[float, float]]:
        """Directions of the lines of the homogeneous quadratic c20q X^2 + 2 c11q XY + c02q Y^2"""
        dirs = []
        if qc.c02q == 0.0:
            dirs.append((0.0, 1.0))
            if qc.c11q != 0.0:
                dirs.append((1.0, -qc.c20q / (2 * qc.c11q)))
        else:
            disc = max(qc.c11q ** 2 - qc.c20q * qc.c02q, 0.0)
            for sign in (1.0, -1.0):
                dirs.append((1.0, (-qc.c11q + sign * np.sqrt(disc)) / qc.c02q))
        return [(dx / np.hypot(dx, dy), dy / np.hypot(dx, dy)) for dx, dy in dirs]

    def _boundary_points(self, wc: WCoeffs, qc: QCoeffs) -> List[Tuple[float, float]]:
        candidates: List[Tuple[float, float]] = []
        if qc.c22q == 0.0:
            directions = self._line_directions(qc)
        else:
            directions = []
            if qc.c20q == 0.0:
                directions.append((1.0, 0.0))
            if qc.c02q == 0.0:
                directions.append((0.0, 1.0))
            quotient, _ = divmod(self.heartsuit_polynomial(wc, qc), Polynomial([-1.0, 1.0]))
            for k in quotient.roots():
                if abs(k.imag) > 1e-7 * max(1.0, abs(k)):
                    continue
                k = float(k.real)
                if abs(k) < 1e-12:
                    continue
                q_k = qc.c20q + 2 * qc.c11q * k + qc.c02q * k * k
                x2 = -q_k / (qc.c22q * k * k)
                if x2 <= 0:
                    continue
                x = np.sqrt(x2)
                candidates.extend([(x, k * x), (-x, -k * x)])
        for dx, dy in directions:
            s = self._ray_exit(wc, dx, dy)
            candidates.extend([(s * dx, s * dy), (-s * dx, -s * dy)])
        polished: List[Tuple[float, float]] = []
        for x, y in candidates:
            p = self._polish(wc, qc, x, y)
            if p is None:
                continue
            if all(np.hypot(p[0] - u, p[1] - v) > 1e-7 * max(1.0, np.hypot(u, v)) for u, v in polished):
                polished.append(p)
        return sorted(polished, key=lambda p: np.arctan2(p[1], p[0]))

    def _polish(self, wc: WCoeffs, qc: QCoeffs, x: float, y: float) -> Optional[Tuple[float, float]]:
        """Newton on (Q, W); rejects candidates that do not converge"""
        for _ in range(30):
            f = np.array([qc(x, y), wc(x, y)])
            jac = np.array([
                [2 * qc.c22q * x * y * y + 2 * qc.c20q * x + 2 * qc.c11q * y,
                 2 * qc.c22q * x * x * y + 2 * qc.c02q * y + 2 * qc.c11q * x],
                [2 * wc.c22 * x * y * y + 2 * wc.c20 * x + 2 * wc.c11 * y,
                 2 * wc.c22 * x * x * y + 2 * wc.c02 * y + 2 * wc.c11 * x],
            ])
            try:
                step = np.linalg.solve(jac, f)
            except np.linalg.LinAlgError:
                break
            x, y = x - step[0], y - step[1]
            if np.hypot(*step) <= 1e-15 * max(1.0, np.hypot(x, y)):
                break
        scale = max(1.0, (x * x + y * y) ** 2)
        if abs(qc(x, y)) > 1e-9 * scale or abs(wc(x, y)) > 1e-9 * scale:
            return None
        return float(x), float(y)

    def _arc(self, wc: WCoeffs, qc: QCoeffs, end: Tuple[float, float]) -> CrossingArc:
        """Arc of {Q = 0} from the origin to a boundary point"""
        x_end, y_end = end
        n = settings.arc_samples
        u = np.linspace(0.0, 1.0, n)
        s = 1.0 - (1.0 - u) ** 2
        eps = 1 if (x_end > 0 or (x_end == 0 and y_end > 0)) else -1
        sigma = 1 if x_end * y_end >= 0 else -1
        on_axis = abs(x_end) <= 1e-12 or abs(y_end) <= 1e-12
        if qc.c22q == 0.0 or on_axis:
            return CrossingArc(eps, 0, sigma, s * x_end, s * y_end)
        if qc.c20q == 0.0:
            # a = 0: Y = 2bX / (X^2 - c)
            xs = s * x_end
            ys = 2 * qc.b * xs / (xs * xs - qc.c)
            return CrossingArc(eps, 0, sigma, xs, ys)
        if qc.c02q == 0.0:
            # c = 0: X = 2bY / (Y^2 - a)
            ys = s * y_end
            xs = 2 * qc.b * ys / (ys * ys - qc.a)
            return CrossingArc(eps, 0, sigma, xs, ys)
        a, b, c = qc.a, qc.b, qc.c
        chi_end = abs(x_end * y_end)

        def x_hat(m, tau):
            root = np.sqrt(np.clip((m - 2 * b) ** 2 - 4 * a * c, 0.0, None))
            return m / (2 * a) * ((m - 2 * b) + tau * np.sign(m) * root)

        table = self.branch_table(qc)
        allowed = [t for (e, t, sg) in table if e == eps and sg == sigma]
        if not allowed:
            logger.debug("arc label (%d, %d) outside the branch table at theta3=%.6f",
                         eps, sigma, qc.theta3)
            allowed = [1, -1]
        elif chi_end > table[(eps, allowed[0], sigma)] * (1 + 1e-9):
            logger.warning("arc end chi=%.6g beyond the branch domain at theta3=%.6f",
                           chi_end, qc.theta3)
        m_end = sigma * chi_end
        tau = min(allowed, key=lambda t: abs(x_hat(m_end, t) - x_end * x_end))
        chi = s * chi_end
        m = sigma * chi[1:]
        xs2 = np.clip(x_hat(m, tau), 1e-300, None)
        xs = np.concatenate([[0.0], eps * np.sqrt(xs2)])
        ys = np.concatenate([[0.0], m / xs[1:]])
        xs[-1], ys[-1] = x_end, y_end
        residual = np.abs(qc(xs, ys)).max()
        if residual > 1e-6 * max(1.0, chi_end ** 2):
            logger.warning("arc sampling residual %.3e at theta3=%.6f", residual, qc.theta3)
        return CrossingArc(eps, tau, sigma, xs, ys)

    # Quadruple intersections

    def quadruple_point(self, theta1: float, theta2: float, theta3: float,
                        theta4: float) -> Tuple[ProjectivePoint, float]:
        """
        Common point of the crossings (t1 t2 t3) and (t1 t2 t4) for sorted angles.

        Returns:
            Ball point and the distance of the computed common points from the disk origin
        """
        _check(InputValidator.validate_distinct_angles([theta1, theta2, theta3, theta4]))
        t1, t2, t3, t4 = sorted([theta1, theta2, theta3, theta4])
        wc = self.w_coefficients(t1, t2)
        q3, q4 = self._q_raw(t1, t2, t3), self._q_raw(t1, t2, t4)
        # eliminate the X^2 Y^2 term
        combo = QCoeffs(0.0, q4.c22q * q3.c20q - q3.c22q * q4.c20q,
                        q4.c22q * q3.c02q - q3.c22q * q4.c02q,
                        q4.c22q * q3.c11q - q3.c22q * q4.c11q, t1, t2, t3)
        found = [(0.0, 0.0)]
        for dx, dy in self._line_directions(combo):
            for qc in (q3, q4):
                quartic = qc.c22q * dx * dx * dy * dy
                quadratic = qc.c20q * dx * dx + qc.c02q * dy * dy + 2 * qc.c11q * dx * dy
                if abs(quartic) <= self.floor:
                    continue
                s2 = -quadratic / quartic
                if s2 <= 0:
                    continue
                for sign in (1.0, -1.0):
                    x, y = sign * np.sqrt(s2) * dx, sign * np.sqrt(s2) * dy
                    scale = max(1.0, (x * x + y * y) ** 2)
                    if (abs(q3(x, y)) <= 1e-9 * scale and abs(q4(x, y)) <= 1e-9 * scale
                            and wc(x, y) <= 0):
                        found.append((x, y))
        pts = np.array(found)
        residual = float(np.hypot(pts[:, 0], pts[:, 1]).max())
        x, y = pts.mean(axis=0)
        point = self.ball_from_psi(float(psi_from_cot(x)), float(psi_from_cot(y)), t1, t2)
        return point, residual

    # Foliation

    def foliation_leaves(self, theta1: float, theta2: float, grid: Optional[int] = None) -> List[Leaf]:
        """
        Crossings for theta3 on a uniform grid of [0, 2pi) plus theta1 and theta2;
        the leaves at 0, theta1 and theta2 are flagged singular.
        """
        _check(InputValidator.validate_angle_pair(theta1, theta2))
        grid = grid or settings.default_grid
        _check(InputValidator.validate_grid(grid))
        start = time.time()
        thetas = [TWO_PI * k / grid for k in range(grid)]
        for special in (theta1, theta2):
            if all(abs(special - t) > self.snap for t in thetas):
                thetas.append(special)
        leaves = []
        for theta3 in sorted(thetas):
            singular = any(abs(theta3 - s) <= self.snap for s in (0.0, theta1, theta2))
            if abs(theta3 - theta1) <= self.snap:
                theta3 = theta1
            elif abs(theta3 - theta2) <= self.snap:
                theta3 = theta2
            leaves.append(Leaf(theta3, singular, self._crossing(theta1, theta2, theta3, singular)))
        AuditLogger.log_computation(
            operation="foliation_leaves",
            data_type="crossing",
            record_count=len(leaves),
            processing_time_ms=int((time.time() - start) * 1000),
            additional_data={"theta1": theta1, "theta2": theta2, "grid": grid},
        )
        return leaves

    def leaf_separation(self, leaves: Sequence[Leaf], exclusion: Optional[float] = None) -> float:
        """Minimum distance between samples of distinct leaves outside an origin neighbourhood"""
        exclusion = settings.leaf_origin_exclusion if exclusion is None else exclusion
        clouds = []
        for leaf in leaves:
            pts = np.concatenate([np.column_stack([arc.X, arc.Y]) for arc in leaf.crossing.arcs])
            clouds.append(pts[np.hypot(pts[:, 0], pts[:, 1]) > exclusion])
        best = np.inf
        for i, cloud in enumerate(clouds):
            others = [c for j, c in enumerate(clouds) if j != i and len(c)]
            if not len(cloud) or not others:
                continue
            best = min(best, float(cKDTree(np.concatenate(others)).query(cloud)[0].min()))
        return best

    # Geographic pair inequality

    def geo_pair_inequality(self, theta1: float, theta2: float, gc: GeoCoord) -> float:
        """
        kappa-free expression whose sign decides whether the geographic point of I(theta1)
        lies in I(theta2) or its interior (non-positive) or outside (positive).

        Raises:
            ValidationError: cot(theta1/2) = cot(theta2/2)
        """
        s1, s2 = np.sin(theta1 / 2), np.sin(theta2 / 2)
        dx = 1 / np.tan(theta1 / 2) - 1 / np.tan(theta2 / 2)
        if abs(dx) <= self.tol:
            raise validation_error("Degenerate sphere pair: cot(theta1/2) = cot(theta2/2)")
        w, al, be = gc.omega, gc.alpha, gc.beta
        return float(4 * w * w / s1 ** 2
                     - 4 / (dx * s1) * (np.cos(al / 2 + be) / s1 ** 2 + dx ** 2 * np.cos(-al / 2 + be)) * w
                     + dx ** 2 + 2 * np.cos(al) / s1 ** 2
                     + (1 / dx ** 2) * (1 / s1 ** 4 - 1 / s2 ** 4))

    def geo_pair_cygan(self, theta1: float, theta2: float, gc: GeoCoord,
                       q: TorusPoint = Q0) -> float:
        """The same quantity from Cygan distances in the frame of q: (d^4 - r2^4) / (K^4 dx^2)"""
        k = 1 / (np.sqrt(2.0) * abs(q.kappa2))
        dx = 1 / np.tan(theta1 / 2) - 1 / np.tan(theta2 / 2)
        r1, r2 = k / np.sin(theta1 / 2), k / np.sin(theta2 / 2)
        p = heis_service.geographic_point(GeoCoord(gc.alpha, gc.beta, gc.omega, r1))
        d = heis_service.cygan_distance(heis_service.horo_from_lift(p.lift),
                                        HeisenbergPoint(complex(k * dx), 0.0))
        return float((d ** 4 - r2 ** 4) / (k ** 4 * dx ** 2))

    def geographic_to_ball(self, theta1: float, gc: GeoCoord, q: TorusPoint = Q0) -> ProjectivePoint:
        """
        Ball point of the geographic sample of I(theta1) in the frame where I(theta1) is
        centred at the origin and the centres of the other spheres lie on the positive real axis.
        """
        line = ellip_service.rcircle_affine_params(q)
        k = abs(line.Cz)
        q_ball = ProjectivePoint(CAYLEY @ q.lift, BALL)
        frame = heis_service.frame_matrix(q_ball)
        center = ellip_service.pushed_circle(q, theta1)
        shift = translation_matrix(-center.z, -center.t)
        rotation = np.diag([1.0, np.exp(1j * (np.pi - np.angle(line.Cz))), 1.0])
        total = rotation @ shift @ frame
        p = heis_service.geographic_point(GeoCoord(gc.alpha, gc.beta, gc.omega,
                                                   k / np.sin(theta1 / 2)))
        return ProjectivePoint(np.linalg.solve(total, p.lift), BALL)


# Global service instance
isect_service = IntersectionService()
