"""
Tests for Heisenberg coordinates, Cygan metrics and isometric spheres
"""
import math

import numpy as np
import pytest

from conftest import ball_boundary_point
from core.exceptions import StabilizerElementError, ValidationError
from models.geometry import SIEGEL, GeoCoord, HeisenbergPoint, HoroPoint
from models.schemas import SphereSide, StabilizerKind
from services.cproj import cproj_service
from services.heis import heis_inverse, heis_mul, heis_service, lift_from_horo
from services.isect import Q_BALL
from services.trigroup import trigroup_service

try:
    from hypothesis import assume, given, settings
    from hypothesis import strategies as st
except ModuleNotFoundError:  # pragma: no cover
    pytest.skip("hypothesis is required for property-based tests", allow_module_level=True)


COORD = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)
HEIGHT = st.floats(min_value=0.0, max_value=5.0, allow_nan=False, allow_infinity=False)
ANGLE = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False, allow_infinity=False)


def horo(x, y, t, u=0.0):
    return HoroPoint(complex(x, y), t, u)


class TestGroupLaw:
    def test_identity(self):
        p = HeisenbergPoint(1 + 2j, 3.0)
        assert heis_mul(HeisenbergPoint(0j, 0.0), p) == p

    def test_sign_convention(self):
        assert heis_mul(HeisenbergPoint(1 + 0j, 0.0), HeisenbergPoint(1j, 0.0)) == HeisenbergPoint(1 + 1j, -2.0)

    def test_inverse(self):
        p = HeisenbergPoint(0.5 - 1.5j, -2.0)
        q = heis_mul(p, heis_inverse(p))
        assert q.z == pytest.approx(0) and q.t == pytest.approx(0)


class TestStabilizer:
    def test_trivial_translation(self):
        t = heis_service.stabilizer_isometry(StabilizerKind.TRANSLATION)
        assert np.allclose(t.matrix, np.eye(3))

    def test_translation_moves_origin(self):
        t = heis_service.stabilizer_isometry(StabilizerKind.TRANSLATION, z=1 - 2j, t=3.0)
        moved = heis_service.apply_to_horo(t, horo(0, 0, 0))
        assert moved.z == pytest.approx(1 - 2j)
        assert moved.t == pytest.approx(3.0)
        assert moved.u == pytest.approx(0.0, abs=1e-12)

    def test_dilation_action(self):
        d = heis_service.stabilizer_isometry(StabilizerKind.DILATION, lam=2.0)
        moved = heis_service.apply_to_horo(d, horo(1, 0, 1, 1))
        assert (moved.z, moved.t, moved.u) == (pytest.approx(2), pytest.approx(4), pytest.approx(4))

    def test_zero_dilation_rejected(self):
        with pytest.raises(ValidationError):
            heis_service.stabilizer_isometry(StabilizerKind.DILATION, lam=0.0)

    def test_matches_group_law(self):
        c, p = HeisenbergPoint(0.3 + 1j, -0.7), HeisenbergPoint(-2 + 0.5j, 1.2)
        moved = heis_service.translate(c, p)
        expected = heis_service.apply_to_horo(
            heis_service.stabilizer_isometry(StabilizerKind.TRANSLATION, z=c.z, t=c.t), p)
        assert moved.z == pytest.approx(expected.z)
        assert moved.t == pytest.approx(expected.t)


class TestCoordinates:
    def test_round_trip(self):
        p = horo(0.4, -1.1, 2.5, 0.75)
        back = heis_service.horo_from_lift(lift_from_horo(p))
        assert back.z == pytest.approx(p.z) and back.t == pytest.approx(p.t) and back.u == pytest.approx(p.u)

    def test_q_infinity_rejected(self, q_infinity):
        with pytest.raises(ValidationError):
            heis_service.horo_from_lift(q_infinity)


class TestCygan:
    def test_examples(self):
        origin = horo(0, 0, 0)
        assert heis_service.cygan_distance(origin, origin) == 0.0
        assert heis_service.cygan_distance(origin, horo(1, 0, 0)) == pytest.approx(1.0)
        assert heis_service.cygan_distance(origin, horo(0, 0, 4)) == pytest.approx(2.0)

    @settings(max_examples=100, deadline=None)
    @given(p=st.tuples(COORD, COORD, COORD, HEIGHT), q=st.tuples(COORD, COORD, COORD, HEIGHT),
           c=st.tuples(COORD, COORD, COORD))
    def test_translation_invariance(self, p, q, c):
        p, q = horo(*p), horo(*q)
        center = HeisenbergPoint(complex(c[0], c[1]), c[2])
        d = heis_service.cygan_distance(p, q)
        moved = heis_service.cygan_distance(heis_service.translate(center, p), heis_service.translate(center, q))
        assert moved == pytest.approx(d, rel=1e-9, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(p=st.tuples(COORD, COORD, COORD, HEIGHT), q=st.tuples(COORD, COORD, COORD, HEIGHT),
           lam=st.floats(min_value=0.1, max_value=10.0))
    def test_dilation_scaling(self, p, q, lam):
        p, q = horo(*p), horo(*q)
        d = heis_service.stabilizer_isometry(StabilizerKind.DILATION, lam=lam)
        scaled = heis_service.cygan_distance(heis_service.apply_to_horo(d, p), heis_service.apply_to_horo(d, q))
        assert scaled == pytest.approx(lam * heis_service.cygan_distance(p, q), rel=1e-9, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(p=st.tuples(COORD, COORD, COORD), q=st.tuples(COORD, COORD, COORD, HEIGHT))
    def test_hermitian_product_form(self, p, q):
        p, q = horo(*p), horo(*q)
        product = cproj_service.hermitian_product(lift_from_horo(p), lift_from_horo(q), SIEGEL)
        assert heis_service.cygan_distance(p, q) == pytest.approx(math.sqrt(abs(2 * product)),
                                                                  rel=1e-9, abs=1e-9)


class TestPullbackCygan:
    def test_same_point(self):
        w = ball_boundary_point(0.3, 0.9, 2.0)
        assert heis_service.pullback_cygan_distance(w, w, Q_BALL) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("a", [(1.0, 1.0, 0.0), (0.0, 0.0, 0.0), (2.5, 0.4, 4.0)])
    def test_diagonal_routes_agree(self, a):
        w = ball_boundary_point(*a)
        closed = heis_service.pullback_cygan_distance(w, w, Q_BALL)
        composite = heis_service.pullback_cygan_composite(w, w, Q_BALL)
        assert closed == 0.0
        assert closed == pytest.approx(composite, abs=1e-12)

    def test_nearby_points_keep_their_distance(self):
        w, w2 = ball_boundary_point(0.3, 0.9, 2.0), ball_boundary_point(0.3 + 1e-4, 0.9, 2.0)
        closed = heis_service.pullback_cygan_distance(w, w2, Q_BALL)
        assert closed > 0
        assert closed == pytest.approx(heis_service.pullback_cygan_composite(w, w2, Q_BALL), rel=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(a=st.tuples(ANGLE, ANGLE, ANGLE), b=st.tuples(ANGLE, ANGLE, ANGLE))
    def test_two_routes_agree(self, a, b):
        w, w2 = ball_boundary_point(*a), ball_boundary_point(*b)
        for point in (w, w2):
            assume(np.abs(point.standard_lift() - Q_BALL.standard_lift()).max() > 1e-1)
        gap = np.abs(w.standard_lift() - w2.standard_lift()).max()
        assume(gap == 0.0 or gap > 1e-6)
        closed = heis_service.pullback_cygan_distance(w, w2, Q_BALL)
        composite = heis_service.pullback_cygan_composite(w, w2, Q_BALL)
        assert closed == pytest.approx(composite, rel=1e-7, abs=1e-9)

    def test_q_ball_rejected(self, ball_origin):
        with pytest.raises(ValidationError):
            heis_service.pullback_cygan_distance(Q_BALL, ball_origin, Q_BALL)


class TestIsometricSphere:
    def test_b_radius(self, params_3_1):
        b = trigroup_service.word_isometries(params_3_1)["B"]
        assert heis_service.isometric_sphere(b).radius == pytest.approx(2 / math.sqrt(5))

    def test_stabilizer_has_no_sphere(self, params_3_1):
        with pytest.raises(StabilizerElementError):
            heis_service.isometric_sphere(trigroup_service.word_isometries(params_3_1)["A"])

    def test_elliptic_fixed_point_on_sphere(self, params_3_1):
        b = trigroup_service.word_isometries(params_3_1)["B"]
        assert heis_service.sphere_side(b, cproj_service.fixed_point(b)) == SphereSide.ON

    @settings(max_examples=100, deadline=None)
    @given(p=st.tuples(COORD, COORD, COORD))
    def test_side_agrees_with_distance(self, p):
        b = trigroup_service.word_isometries(trigroup_service.params_from_t(3, 1.0))["B"]
        sphere = heis_service.isometric_sphere(b)
        point = horo(*p)
        gap = heis_service.cygan_distance(point, sphere.center) - sphere.radius
        assume(abs(gap) > 1e-6)
        expected = SphereSide.INSIDE if gap < 0 else SphereSide.OUTSIDE
        assert heis_service.sphere_side(b, point) == expected

    def test_siegel_frame_map(self):
        frame = heis_service.siegel_frame_map(Q_BALL)
        image = frame.matrix @ Q_BALL.lift
        assert cproj_service.projective_equal(image, [1, 0, 0])


class TestGeographic:
    def test_equator_point(self):
        p = heis_service.geographic_point(GeoCoord(0.0, 0.0, 1.0, 1.0))
        assert np.allclose(p.lift, [-0.5, 1, 1])
        h = heis_service.horo_from_lift(p)
        assert h.u == 0.0
        assert heis_service.cygan_distance(h, horo(0, 0, 0)) == pytest.approx(1.0)

    def test_pole(self):
        h = heis_service.horo_from_lift(heis_service.geographic_point(GeoCoord(math.pi / 2, 0.0, 0.0, 1.5)))
        assert h.z == pytest.approx(0) and h.u == pytest.approx(0, abs=1e-12)
        assert abs(h.t) == pytest.approx(1.5 ** 2)

    def test_omega_bound(self):
        with pytest.raises(ValidationError):
            heis_service.geographic_point(GeoCoord(1.0, 0.0, 1.0, 1.0))

    @settings(max_examples=100, deadline=None)
    @given(alpha=st.floats(min_value=-1.5, max_value=1.5), beta=ANGLE,
           frac=st.floats(min_value=-1.0, max_value=1.0), r=st.floats(min_value=0.1, max_value=4.0))
    def test_height_formula(self, alpha, beta, frac, r):
        omega = frac * math.sqrt(math.cos(alpha))
        h = heis_service.horo_from_lift(heis_service.geographic_point(GeoCoord(alpha, beta, omega, r)))
        assert h.u == pytest.approx(r * r * (math.cos(alpha) - omega * omega), abs=1e-9)
        assert heis_service.cygan_distance(h, horo(0, 0, 0)) == pytest.approx(r, rel=1e-9)

    def test_translated_sphere(self):
        center = HeisenbergPoint(1.5 - 0.5j, 2.0)
        alpha = np.linspace(-1.4, 1.4, 15)
        phi = np.linspace(0.0, 2 * np.pi, 15)
        rows = heis_service.ideal_geographic_lifts(alpha, phi, 0.8, center)
        for lift in rows:
            h = heis_service.horo_from_lift(lift)
            assert h.u == pytest.approx(0.0, abs=1e-9)
            assert heis_service.cygan_distance(h, center) == pytest.approx(0.8, rel=1e-9)
