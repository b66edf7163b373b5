"""
Projective models of the complex hyperbolic plane
Hermitian forms, Cayley transform, SU(H) membership, isometry classification,
Cartan invariants and complex reflections
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

from config import settings
from core.exceptions import (
    degenerate_error,
    not_in_group_error,
    validation_error,
)
from models.geometry import (
    BALL,
    CAYLEY,
    SIEGEL,
    HermitianForm,
    Isometry,
    ProjectivePoint,
)
from models.schemas import ConeSign, IsometryClass, IsometryKind, RefinedKind

logger = logging.getLogger(__name__)

VectorLike = Union[ProjectivePoint, Sequence[complex], np.ndarray]


def goldman_discriminant(z: complex) -> float:
    """f(z) = |z|^4 - 8 Re(z^3) + 18 |z|^2 - 27"""
    z = complex(z)
    a2 = abs(z) ** 2
    return float(a2 * a2 - 8.0 * (z ** 3).real + 18.0 * a2 - 27.0)


def _lift(v: VectorLike) -> np.ndarray:
    if isinstance(v, ProjectivePoint):
        return v.lift
    arr = np.asarray(v, dtype=complex).reshape(3)
    return arr


class ProjectiveGeometryService:
    """Operations on points and isometries of the two projective models"""

    def __init__(self, tol: Optional[float] = None, unitarity_tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.tol
        self.unitarity_tol = unitarity_tol if unitarity_tol is not None else settings.unitarity_tol

    # Points

    def hermitian_product(self, u: VectorLike, v: VectorLike,
                          form: Optional[HermitianForm] = None) -> complex:
        """
        Evaluate <u, v> = v* H u.

        Args:
            u: First vector or point
            v: Second vector or point
            form: Form to use; taken from the points when omitted

        Returns:
            Complex scalar

        Raises:
            ValidationError: Points tagged with different forms
        """
        forms = {p.form.kind for p in (u, v) if isinstance(p, ProjectivePoint)}
        if form is not None:
            forms.add(form.kind)
        if len(forms) > 1:
            raise validation_error("Hermitian product of points against different forms",
                                   {"forms": sorted(f.value for f in forms)})
        kind = forms.pop() if forms else SIEGEL.kind
        h = HermitianForm(kind).matrix
        return complex(_lift(v).conj() @ h @ _lift(u))

    def cone_sign(self, p: ProjectivePoint) -> ConeSign:
        """Negative, null or positive cone with a relative tolerance band"""
        norm2 = float(np.vdot(p.lift, p.lift).real)
        if norm2 == 0.0:
            raise validation_error("Zero vector is not a projective point")
        value = self.hermitian_product(p, p).real
        if abs(value) <= self.tol * norm2:
            return ConeSign.NULL
        return ConeSign.NEGATIVE if value < 0 else ConeSign.POSITIVE

    def projective_equal(self, p: VectorLike, q: VectorLike, tol: Optional[float] = None) -> bool:
        """Compare lifts after scaling the largest-modulus coordinate of p to 1"""
        tol = self.tol if tol is None else tol
        a, b = _lift(p), _lift(q)
        idx = int(np.argmax(np.abs(a)))
        if abs(b[idx]) <= tol * np.abs(b).max():
            return False
        return bool(np.abs(a / a[idx] - b / b[idx]).max() <= tol * 10)

    def bergman_distance(self, u: ProjectivePoint, v: ProjectivePoint) -> float:
        """
        Bergman distance from cosh^2(d/2) = <u,v><v,u> / (<u,u><v,v>).

        Raises:
            ValidationError: Either point outside the negative cone
        """
        for p in (u, v):
            if self.cone_sign(p) != ConeSign.NEGATIVE:
                raise validation_error("Bergman distance needs negative-cone points",
                                       {"lift": [str(x) for x in p.lift]})
        uv = self.hermitian_product(u, v)
        ratio = abs(uv) ** 2 / (self.hermitian_product(u, u).real * self.hermitian_product(v, v).real)
        return float(2.0 * np.arccosh(np.sqrt(max(ratio, 1.0))))

    def cayley_transform(self, p: ProjectivePoint) -> ProjectivePoint:
        """Move a point to the other model"""
        if not np.any(p.lift):
            raise validation_error("Zero vector is not a projective point")
        return ProjectivePoint(CAYLEY @ p.lift, p.form.other())

    def cartan_invariant(self, p1: ProjectivePoint, p2: ProjectivePoint, p3: ProjectivePoint) -> float:
        """
        Cartan angular invariant arg(-<p1,p2><p2,p3><p3,p1>) of three boundary points.

        Raises:
            ValidationError: Some point is not null
            DegenerateConfigurationError: Some pair is (numerically) coincident
        """
        for p in (p1, p2, p3):
            if self.cone_sign(p) != ConeSign.NULL:
                raise validation_error("Cartan invariant needs boundary (null) points",
                                       {"lift": [str(x) for x in p.lift]})
        return self.triple_argument(p1, p2, p3)

    def triple_argument(self, p1: ProjectivePoint, p2: ProjectivePoint, p3: ProjectivePoint) -> float:
        """arg(-<p1,p2><p2,p3><p3,p1>) for arbitrary non-orthogonal points"""
        pairs = ((p1, p2), (p2, p3), (p3, p1))
        products = []
        for a, b in pairs:
            value = self.hermitian_product(a, b)
            scale = np.linalg.norm(a.lift) * np.linalg.norm(b.lift)
            if abs(value) <= self.tol * scale:
                raise degenerate_error("coincident points in Cartan triple")
            products.append(value)
        return float(np.angle(-products[0] * products[1] * products[2]))

    # Isometries

    def make_isometry(self, matrix, form: HermitianForm = SIEGEL, check: bool = True) -> Isometry:
        """
        Divide by the principal cube root of det and verify M* H M = H.

        Raises:
            ValidationError: Singular or malformed matrix
            NotInGroupError: Unitarity residual above tolerance
        """
        m = np.asarray(matrix, dtype=complex).reshape(3, 3)
        det = complex(np.linalg.det(m))
        if abs(det) <= self.tol:
            raise validation_error("Singular matrix cannot be an isometry", {"det": abs(det)})
        m = m / det ** (1.0 / 3.0)
        if check:
            residual = self.unitarity_residual(m, form)
            if residual > self.unitarity_tol:
                raise not_in_group_error(residual, form.kind.value)
        return Isometry(m, form)

    def unitarity_residual(self, matrix: np.ndarray, form: HermitianForm) -> float:
        h = form.matrix
        m = np.asarray(matrix, dtype=complex)
        return float(np.abs(m.conj().T @ h @ m - h).max() / max(1.0, np.abs(m).max() ** 2))

    def cayley_conjugate(self, g: Isometry) -> Isometry:
        """C M C, moving an isometry to the other model"""
        return Isometry(CAYLEY @ g.matrix @ CAYLEY, g.form.other())

    def classify_isometry(self, g: Isometry) -> IsometryClass:
        """
        Classify by f(trace) of the det-normalized matrix.

        Args:
            g: Isometry, re-checked for SU(H) membership

        Returns:
            IsometryClass with a best-effort refinement in the Boundary band

        Raises:
            NotInGroupError: Matrix not in SU(H)
        """
        g = self.make_isometry(g.matrix, g.form)
        tr = g.trace
        f = goldman_discriminant(tr)
        band = self.tol * max(1.0, abs(tr) ** 4)
        if f > band:
            kind = IsometryKind.LOXODROMIC
        elif f < -band:
            kind = IsometryKind.REGULAR_ELLIPTIC
        else:
            kind = IsometryKind.BOUNDARY
        refined = self._refine(g) if kind == IsometryKind.BOUNDARY else None
        logger.debug("classified trace=%s f=%.6g as %s", tr, f, kind.value)
        return IsometryClass(kind=kind, f_value=f, trace=(tr.real, tr.imag), refined=refined)

    def _refine(self, g: Isometry) -> RefinedKind:
        m = g.matrix
        scale = max(1.0, float(np.abs(m).max()))
        lam = g.trace / 3.0
        if np.abs(m - lam * np.eye(3)).max() <= 1e3 * self.tol * scale:
            return RefinedKind.IDENTITY
        eig = np.linalg.eigvals(m)
        spread = max(abs(a - b) for a in eig for b in eig)
        if spread <= 1e-4 * scale:
            return RefinedKind.UNIPOTENT
        # one repeated pair: diagonalizable means rank(M - lambda I) == 1
        i, j = min(((a, b) for a in range(3) for b in range(a + 1, 3)),
                   key=lambda ij: abs(eig[ij[0]] - eig[ij[1]]))
        repeated = (eig[i] + eig[j]) / 2.0
        sv = np.linalg.svd(m - repeated * np.eye(3), compute_uv=False)
        if sv[1] <= 1e-6 * scale:
            return RefinedKind.SPECIAL_ELLIPTIC
        return RefinedKind.SCREW_PARABOLIC

    def fixed_point(self, g: Isometry) -> ProjectivePoint:
        """
        Fixed point of g: the negative eigenvector when one exists, otherwise the
        kernel of M - (tr/3) I (parabolic elements).
        """
        m = g.matrix
        vals, vecs = np.linalg.eig(m)
        for k in range(3):
            p = ProjectivePoint(vecs[:, k], g.form)
            if self.hermitian_product(p, p).real < -self.tol:
                return p
        _, _, vh = np.linalg.svd(m - (np.trace(m) / 3.0) * np.eye(3))
        return ProjectivePoint(vh[-1].conj(), g.form)

    def complex_reflection(self, polar: ProjectivePoint) -> Isometry:
        """
        Order-two complex reflection p -> -p + 2 <p,n>/<n,n> n.

        Raises:
            ValidationError: Polar vector not positive
        """
        nn = self.hermitian_product(polar, polar).real
        if self.cone_sign(polar) != ConeSign.POSITIVE:
            raise validation_error("Polar vector of a complex reflection must be positive",
                                   {"norm": nn})
        n = polar.lift.reshape(3, 1)
        h = polar.form.matrix
        matrix = -np.eye(3) + 2.0 * (n @ (n.conj().T @ h)) / nn
        return self.make_isometry(matrix, polar.form)

    def angular_invariant_of_polars(self, n1: ProjectivePoint, n2: ProjectivePoint,
                                    n3: ProjectivePoint) -> float:
        """arg(<n3,n2><n1,n3><n2,n1>) in (-pi, pi]"""
        product = (self.hermitian_product(n3, n2) * self.hermitian_product(n1, n3)
                   * self.hermitian_product(n2, n1))
        return float(np.angle(product))


# Global service instance
cproj_service = ProjectiveGeometryService()
