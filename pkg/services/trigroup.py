"""
Complex hyperbolic (n, inf, inf) triangle groups
Parameterization, generators, isometric-sphere families, margins rho_{j',j,k}
and the discreteness certificate
"""
import logging
import math
import time
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from config import settings
from core.audit import AuditLogger, InputValidator
from core.exceptions import (
    GeometryToolkitError,
    StabilizerElementError,
    degenerate_error,
    processing_error,
    validation_error,
)
from models.geometry import (
    SIEGEL,
    CyganSphere,
    HeisenbergPoint,
    Isometry,
    ProjectivePoint,
    SphereFamily,
    TriangleParams,
)
from models.schemas import (
    CertificateEntry,
    DiscretenessCertificate,
    IsometryClass,
    SweepCrossing,
    SweepRow,
    SweepTable,
    Verdict,
)
from services.cproj import cproj_service
from services.heis import heis_mul, heis_service

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)

Triple = Tuple[int, int, int]
SPHERE_CACHE_SIZE = 4096


def _check(result: Tuple[bool, Optional[str]]):
    ok, message = result
    if not ok:
        raise validation_error(message)


def threshold(n: int) -> float:
    """tan(pi/(2n)): W_A is parabolic there, loxodromic above"""
    _check(InputValidator.validate_triangle_order(n))
    return math.tan(math.pi / (2 * n))


def k_bound(n: int) -> int:
    """Largest k with k < 2/sin(pi/n)"""
    return math.ceil(2.0 / math.sin(math.pi / n) - 1e-9) - 1


def required_triples(n: int) -> List[Triple]:
    """(j', j, k) checked by the certificate, tangency pair excluded"""
    return [(jp, j, k)
            for k in range(1, k_bound(n) + 1)
            for jp in range(1, n)
            for j in range(1, n)
            if (jp, j, k) != (1, n - 1, 1)]


class TriangleGroupService:
    """Representations rho_A of the (n, inf, inf) triangle group and their certificates"""

    def __init__(self, tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.tol
        self._spheres: Dict[Tuple[TriangleParams, int], CyganSphere] = {}

    # Parameters

    def params_from_t(self, n: int, t: float) -> TriangleParams:
        """
        (y, z) on the parameter circle for t = tan(A/2).

        Raises:
            ValidationError: n < 3 or t <= 0
        """
        _check(InputValidator.validate_triangle_order(n))
        _check(InputValidator.validate_positive("t", t))
        c = math.cos(math.pi / n)
        a = (1 - t * t) / (1 + t * t)
        denominator = 2 * a * c - (1 + c * c)
        y = (a * c - 1) / denominator
        z = (-2 * t / (1 + t * t)) * c / denominator
        return TriangleParams(n=n, t=float(t), y=float(y), z=float(z))

    def params_from_angular(self, n: int, angular: float) -> TriangleParams:
        """Same, from the angular invariant A in (0, pi)"""
        if not 0.0 < angular < math.pi:
            raise validation_error("Angular invariant must lie in (0, pi)", {"A": angular})
        return self.params_from_t(n, math.tan(angular / 2))

    def circle_residual(self, p: TriangleParams) -> float:
        """|(y - 1/sin^2)^2 + z^2 - cos^2/sin^4| at pi/n"""
        s, c = math.sin(math.pi / p.n), math.cos(math.pi / p.n)
        return abs((p.y - 1 / s ** 2) ** 2 + p.z ** 2 - c ** 2 / s ** 4)

    def angular_from_params(self, p: TriangleParams) -> float:
        """arg(y - 1 + zi) - arg(y + zi), reduced to (0, 2pi)"""
        value = np.angle(complex(p.y - 1, p.z)) - np.angle(complex(p.y, p.z))
        return float(value % (2 * np.pi))

    # Generators and words

    def polars(self, p: TriangleParams) -> Tuple[ProjectivePoint, ProjectivePoint, ProjectivePoint]:
        return (ProjectivePoint(np.array([0.0, 1.0, 0.0]), SIEGEL),
                ProjectivePoint(np.array([1.0, -1.0, 0.0]), SIEGEL),
                ProjectivePoint(np.array([0.0, complex(p.y, p.z), 1.0]), SIEGEL))

    def generators(self, p: TriangleParams) -> Tuple[Isometry, Isometry, Isometry]:
        """
        The complex reflections I1, I2, I3.

        Raises:
            ValidationError: y^2 + z^2 vanishes
        """
        if p.y * p.y + p.z * p.z <= self.tol:
            raise validation_error("Degenerate parameters: y^2 + z^2 = 0", {"y": p.y, "z": p.z})
        return tuple(cproj_service.complex_reflection(n) for n in self.polars(p))

    def word_isometries(self, p: TriangleParams) -> Dict[str, Isometry]:
        """A = I1 I2, B = I2 I3, W_A = I1 I3 I2 I3, W_B = I1 I2 I3 and AB"""
        i1, i2, i3 = self.generators(p)
        a, b = i1 @ i2, i2 @ i3
        return {"A": a, "B": b, "W_A": i1 @ i3 @ i2 @ i3, "W_B": i1 @ i2 @ i3, "AB": a @ b}

    def power_of_B(self, p: TriangleParams, k: int) -> Isometry:
        """
        B^k = cos(2pi k/n) I + sin(2pi k/n)/sin(2pi/n) (B - cos(2pi/n) I - v/2)
              + (1 - cos(2pi k/n)) / (4 sin^2(pi/n)) v,  v = B^2 - 2 mu B + I.
        """
        b = self.word_isometries(p)["B"].matrix
        n = p.n
        mu = math.cos(2 * math.pi / n)
        eye = np.eye(3)
        v = b @ b - 2 * mu * b + eye
        angle = 2 * math.pi * k / n
        m = (math.cos(angle) * eye
             + math.sin(angle) / math.sin(2 * math.pi / n) * (b - mu * eye - v / 2)
             + (1 - math.cos(angle)) / (4 * math.sin(math.pi / n) ** 2) * v)
        return Isometry(m, SIEGEL)

    def conjugated_power(self, p: TriangleParams, j: int, k: int) -> Isometry:
        """A^k B^j A^-k"""
        a = self.word_isometries(p)["A"]
        return a.power(k) @ self.power_of_B(p, j) @ a.power(-k)

    # Sphere families

    def sphere_family(self, p: TriangleParams, k_max: int = 0) -> SphereFamily:
        """
        Radii r_j and centres c_{j,k} for 0 <= k <= k_max.

        Raises:
            StabilizerElementError: a (3,1) entry vanishes, with witness (j, k)
        """
        centers: Dict[Tuple[int, int], HeisenbergPoint] = {}
        radii: List[float] = []
        for j in range(1, p.n):
            for k in range(0, k_max + 1):
                try:
                    sphere = heis_service.isometric_sphere(self.conjugated_power(p, j, k))
                except StabilizerElementError as e:
                    e.details.update({"j": j, "k": k})
                    raise
                centers[(j, k)] = sphere.center
                if k == 0:
                    radii.append(sphere.radius)
        return SphereFamily(params=p, radii=tuple(radii), centers=centers)

    def base_sphere(self, p: TriangleParams, j: int) -> CyganSphere:
        """I_{j,0}, the isometric sphere of B^j"""
        key = (p, j)
        if key not in self._spheres:
            if len(self._spheres) >= SPHERE_CACHE_SIZE:
                self._spheres.clear()
            self._spheres[key] = heis_service.isometric_sphere(self.power_of_B(p, j))
        return self._spheres[key]

    def center(self, p: TriangleParams, j: int, k: int) -> HeisenbergPoint:
        """c_{j,k} = T_[-2k,0](c_{j,0})"""
        base = self.base_sphere(p, j).center
        return heis_mul(HeisenbergPoint(complex(-2 * k), 0.0), base)

    def radius(self, p: TriangleParams, j: int) -> float:
        return self.base_sphere(p, j).radius

    def translation_law_residual(self, family: SphereFamily) -> float:
        """Max deviation of c_{j,k} from T_[-2k,0](c_{j,0}) over the stored centres"""
        worst = 0.0
        for (j, k), c in family.centers.items():
            expected = heis_mul(HeisenbergPoint(complex(-2 * k), 0.0), family.centers[(j, 0)])
            worst = max(worst, abs(c.z - expected.z), abs(c.t - expected.t))
        return worst

    def rho(self, p: TriangleParams, jprime: int, j: int, k: int) -> float:
        """
        d_Cyg(c_{j',0}, c_{j,k}) - (r_j' + r_j).

        Raises:
            ValidationError: indices outside 1..n-1
        """
        for name, value in (("jprime", jprime), ("j", j)):
            if not 1 <= value <= p.n - 1:
                raise validation_error(f"{name} must lie in 1..{p.n - 1}", {name: value})
        d = heis_service.cygan_distance(self.center(p, jprime, 0), self.center(p, j, k))
        return float(d - (self.radius(p, jprime) + self.radius(p, j)))

    # Closed forms

    def closed_form_radius(self, n: int, j: int, t: float) -> float:
        s2, c2 = math.sin(math.pi / (2 * n)), math.cos(math.pi / (2 * n))
        return (0.5 * math.sqrt(t * t + 1) * math.sin(math.pi / n)
                / math.sqrt(t * t * c2 ** 4 + s2 ** 4) / math.sin(math.pi * j / n))

    def closed_form_center(self, n: int, j: int, k: int, t: float) -> HeisenbergPoint:
        """Explicit centres for n = 3"""
        if n != 3 or j not in (1, 2):
            raise validation_error("Explicit centres are tabulated for n = 3 only")
        d = 9 * t * t + 1
        if j == 1:
            return HeisenbergPoint(-2 * k + complex(6 * t * t + 2, 4 * t) / d, 16 * t * k / d)
        return HeisenbergPoint(-2 * k + complex(12 * t * t, -4 * t) / d, 16 * t / d - 16 * t * k / d)

    def closed_form_rho(self, n: int, jprime: int, j: int, k: int, t: float) -> float:
        """
        Margins with explicit expressions: n = 3 (2,1,1); n = 4 (2,2,1), (3,1,1);
        n = 5 (2,3,1), (3,2,1), (4,1,1).

        Raises:
            ValidationError: no closed form for the requested margin
        """
        key = (n, jprime, j, k)
        t2 = t * t
        if key == (3, 2, 1, 1):
            return 8 * t / math.sqrt(9 * t2 + 1) - 4 * math.sqrt(t2 + 1) / math.sqrt(9 * t2 + 1)
        if key == (4, 2, 2, 1):
            r2 = math.sqrt((t2 + 1) / ((3 + 2 * SQRT2) * t2 + (3 - 2 * SQRT2)))
            return 2 - 2 * r2
        if key == (4, 3, 1, 1):
            r1 = math.sqrt(2 * (t2 + 1) / ((3 + 2 * SQRT2) * t2 + (3 - 2 * SQRT2)))
            ratio = 1 + 4 * ((3 * SQRT2 + 4) * t2 * t2 - (3 * SQRT2 - 4)) / (t2 + 1) ** 2
            return 2 * r1 * ratio ** 0.25 - 2 * r1
        if n == 5 and (jprime, j, k) in {(2, 3, 1), (3, 2, 1), (4, 1, 1)}:
            if (jprime, j) == (2, 3):
                d4 = 256 * (4 / (25 * (9 + 4 * SQRT5) * t2 + 5) + 0.2) ** 2
            elif (jprime, j) == (3, 2):
                d4 = 16384 * t2 * t2 / (5 * (3 + SQRT5) * t2 - 3 * SQRT5 + 7) ** 2
            else:
                d4 = (25600 / (5 + SQRT5) ** 4
                      * (((7 + 3 * SQRT5) * t2 + (3 - SQRT5)) / (5 * t2 - 4 * SQRT5 + 9)) ** 2)
            return d4 ** 0.25 - self.closed_form_radius(5, jprime, t) - self.closed_form_radius(5, j, t)
        raise validation_error("No closed form for this margin", {"n": n, "triple": [jprime, j, k]})

    # Tangency

    def _parabolic_fixed_point(self, g: Isometry) -> np.ndarray:
        """Kernel of M - I for a unipotent det-normalized matrix"""
        m = cproj_service.make_isometry(g.matrix, g.form).matrix
        _, sv, vh = np.linalg.svd(m - (np.trace(m) / 3.0) * np.eye(3))
        if sv[1] <= 1e3 * self.tol * max(1.0, sv[0]):
            raise degenerate_error("fixed point of AB is not isolated", {"singular_values": sv.tolist()})
        return vh[-1].conj()

    def tangency_check(self, p: TriangleParams, k: int = 0) -> Tuple[float, float]:
        """
        Residuals for the tangency of I_{1,k} and I_{n-1,k+1} at the fixed point of A^k(AB)A^-k.

        Returns:
            (|d(c_{1,k}, c_{n-1,k+1}) - (r_1 + r_{n-1})|, worst distance of the fixed point
            from either sphere)
        """
        words = self.word_isometries(p)
        a = words["A"]
        g = a.power(k) @ words["AB"] @ a.power(-k)
        c1, c2 = self.center(p, 1, k), self.center(p, p.n - 1, k + 1)
        r1, r2 = self.radius(p, 1), self.radius(p, p.n - 1)
        spheres_gap = abs(heis_service.cygan_distance(c1, c2) - (r1 + r2))
        try:
            fixed = heis_service.horo_from_lift(self._parabolic_fixed_point(g))
        except GeometryToolkitError as e:
            logger.warning("tangency fixed point extraction failed: %s", e.message)
            return spheres_gap, float("inf")
        point_gap = max(abs(heis_service.cygan_distance(fixed, c1) - r1),
                        abs(heis_service.cygan_distance(fixed, c2) - r2))
        return float(spheres_gap), float(point_gap)

    def tangency_point(self, p: TriangleParams, k: int = 0) -> ProjectivePoint:
        words = self.word_isometries(p)
        a = words["A"]
        return ProjectivePoint(self._parabolic_fixed_point(a.power(k) @ words["AB"] @ a.power(-k)), SIEGEL)

    def tangency_orbit_check(self, p: TriangleParams, k: int = 0) -> float:
        """A^{k+1} B^-1 A^-(k+1) sends p_k to p_{k+1}; returns the projective mismatch"""
        a = self.word_isometries(p)["A"]
        g = a.power(k + 1) @ self.power_of_B(p, -1) @ a.power(-(k + 1))
        image = g(self.tangency_point(p, k)).normalized()
        target = self.tangency_point(p, k + 1).normalized()
        return float(np.abs(image - target).max())

    # Classification

    def wa_type(self, p: TriangleParams) -> IsometryClass:
        return cproj_service.classify_isometry(self.word_isometries(p)["W_A"])

    def wb_type(self, p: TriangleParams) -> IsometryClass:
        return cproj_service.classify_isometry(self.word_isometries(p)["W_B"])

    def wa_trace_formula(self, p: TriangleParams) -> float:
        """3 + 16(1 - y)/(y^2 + z^2)"""
        return 3 + 16 * (1 - p.y) / (p.y ** 2 + p.z ** 2)

    # Certificates

    def certify(self, p: TriangleParams) -> DiscretenessCertificate:
        """
        Evaluate every required margin and the tangency at (1, n-1, 1).

        Args:
            p: Triangle group parameters

        Returns:
            DiscretenessCertificate; Certified only when all margins exceed tol and the
            tangency residual is below tol
        """
        start = time.time()
        entries = [CertificateEntry(jprime=jp, j=j, k=k, rho=self.rho(p, jp, j, k))
                   for jp, j, k in required_triples(p.n)]
        tangency = max(self.tangency_check(p, 0))
        worst = min(entries, key=lambda e: e.rho)
        if worst.rho < -self.tol:
            verdict, witness = Verdict.FAILED, worst
        elif worst.rho <= self.tol:
            verdict, witness = Verdict.BOUNDARY, worst
        elif tangency >= self.tol:
            verdict, witness = Verdict.FAILED, None
        else:
            verdict, witness = Verdict.CERTIFIED, None
        certificate = DiscretenessCertificate(
            n=p.n, t=p.t, k_bound=k_bound(p.n), entries=entries,
            tangency_residual=tangency, verdict=verdict, min_margin=worst.rho,
            witness=witness, wa_type=self.wa_type(p).kind, wb_type=self.wb_type(p).kind,
        )
        AuditLogger.log_computation(
            operation="certify",
            data_type="triangle_group",
            record_count=len(entries),
            processing_time_ms=int((time.time() - start) * 1000),
            additional_data={"n": p.n, "t": p.t, "verdict": verdict.value},
        )
        logger.info("certify n=%d t=%.6g -> %s (min margin %.3e)", p.n, p.t, verdict.value, worst.rho)
        return certificate

    def certify_sweep(self, n: int, t_grid: Iterable[float]) -> SweepTable:
        """
        Every required rho over a t-grid, plus sign changes located by brentq.

        Raises:
            ValidationError: empty grid
        """
        ts = sorted(float(t) for t in t_grid)
        if not ts:
            raise validation_error("Sweep grid must be nonempty")
        start = time.time()
        triples = required_triples(n)
        values = np.array([[self.rho(self.params_from_t(n, t), *tr) for tr in triples] for t in ts])
        rows = [SweepRow(n=n, t=t, jprime=jp, j=j, k=k, rho=float(values[i, c]))
                for i, t in enumerate(ts) for c, (jp, j, k) in enumerate(triples)]
        crossings: List[SweepCrossing] = []
        for c, tr in enumerate(triples):
            for i in range(len(ts) - 1):
                lo, hi = values[i, c], values[i + 1, c]
                if lo == 0.0:
                    crossings.append(SweepCrossing(jprime=tr[0], j=tr[1], k=tr[2], t=ts[i]))
                elif lo * hi < 0:
                    root = brentq(lambda t: self.rho(self.params_from_t(n, t), *tr),
                                  ts[i], ts[i + 1], xtol=1e-12)
                    crossings.append(SweepCrossing(jprime=tr[0], j=tr[1], k=tr[2], t=float(root)))
        AuditLogger.log_computation(
            operation="certify_sweep",
            data_type="triangle_group",
            record_count=len(rows),
            processing_time_ms=int((time.time() - start) * 1000),
            additional_data={"n": n, "grid": len(ts), "crossings": len(crossings)},
        )
        return SweepTable(n=n, threshold=threshold(n), rows=rows, crossings=crossings)

    def margin_root(self, n: int, triple: Triple, lo: float, hi: float) -> float:
        """Root of one margin curve inside [lo, hi]"""
        f = lambda t: self.rho(self.params_from_t(n, t), *triple)
        if f(lo) * f(hi) > 0:
            raise processing_error("Margin does not change sign on the bracket",
                                   {"triple": list(triple), "bracket": [lo, hi]})
        return float(brentq(f, lo, hi, xtol=1e-13))


# Global service instance
trigroup_service = TriangleGroupService()
