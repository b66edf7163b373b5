"""
Tests for the (n, inf, inf) triangle group family and its discreteness certificate
"""
import math

import numpy as np
import pytest

from core.exceptions import ProcessingError, ValidationError
from models.schemas import IsometryKind, Verdict
from services.cproj import cproj_service
from services.heis import translation_matrix
from services.trigroup import k_bound, required_triples, threshold, trigroup_service

N5_TRIPLES = [(2, 3, 1), (3, 2, 1), (4, 1, 1)]


def _sampled_ratios(n, count=100):
    """Random multiples of the threshold in [0.2, 5] away from the parabolic band"""
    rng = np.random.default_rng(n)
    ratios = rng.uniform(0.2, 5.0, size=4 * count)
    return [float(r) for r in ratios if abs(r - 1.0) > 0.02][:count]


class TestParameters:
    def test_n3_t1(self, params_3_1):
        assert (params_3_1.y, params_3_1.z) == pytest.approx((0.8, 0.4))
        assert params_3_1.angular == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("n", [3, 4, 5, 7])
    @pytest.mark.parametrize("t", [0.1, 0.6, 1.0, 2.5])
    def test_on_parameter_circle(self, n, t):
        assert trigroup_service.circle_residual(trigroup_service.params_from_t(n, t)) < 1e-9

    def test_angular_invariant(self, params_3_1):
        assert trigroup_service.angular_from_params(params_3_1) == pytest.approx(math.pi / 2)

    def test_from_angular(self):
        p = trigroup_service.params_from_angular(4, 1.2)
        assert p.t == pytest.approx(math.tan(0.6))

    @pytest.mark.parametrize("n, t", [(2, 1.0), (3, 0.0), (3, -1.0)])
    def test_invalid(self, n, t):
        with pytest.raises(ValidationError):
            trigroup_service.params_from_t(n, t)

    def test_threshold_and_bound(self):
        assert threshold(3) == pytest.approx(1 / math.sqrt(3))
        assert threshold(4) == pytest.approx(math.sqrt(2) - 1)
        assert k_bound(3) == 2
        assert len(required_triples(3)) == 7
        assert (1, 2, 1) not in required_triples(3)


class TestWords:
    def test_a_is_horizontal_translation(self, params_3_1):
        a = trigroup_service.word_isometries(params_3_1)["A"]
        assert np.allclose(a.matrix, translation_matrix(-2, 0))
        nilpotent = a.matrix - np.eye(3)
        assert np.allclose(nilpotent @ nilpotent @ nilpotent, 0)

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_b_has_order_n(self, n):
        p = trigroup_service.params_from_t(n, 0.9)
        b = trigroup_service.word_isometries(p)["B"]
        assert np.allclose(b.power(n).matrix, np.eye(3), atol=1e-9)

    @pytest.mark.parametrize("k", [-2, -1, 0, 1, 2, 4])
    def test_power_formula(self, k):
        p = trigroup_service.params_from_t(5, 0.7)
        b = trigroup_service.word_isometries(p)["B"]
        assert np.allclose(trigroup_service.power_of_B(p, k).matrix, b.power(k).matrix, atol=1e-9)

    def test_wa_trace(self, params_3_1):
        w_a = trigroup_service.word_isometries(params_3_1)["W_A"]
        assert trigroup_service.wa_trace_formula(params_3_1) == pytest.approx(7.0)
        assert w_a.trace == pytest.approx(7.0)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_wa_parabolic_at_threshold(self, n):
        p = trigroup_service.params_from_t(n, threshold(n))
        assert trigroup_service.wa_trace_formula(p) == pytest.approx(3.0, abs=1e-9)

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_wa_regimes(self, n):
        below = trigroup_service.params_from_t(n, threshold(n) / 2)
        above = trigroup_service.params_from_t(n, threshold(n) * 2)
        assert trigroup_service.wa_type(below).kind == IsometryKind.REGULAR_ELLIPTIC
        assert trigroup_service.wa_type(above).kind == IsometryKind.LOXODROMIC

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_wa_regime_on_random_parameters(self, n):
        for ratio in _sampled_ratios(n):
            p = trigroup_service.params_from_t(n, ratio * threshold(n))
            cls = trigroup_service.wa_type(p)
            assert cls.trace[0] == pytest.approx(trigroup_service.wa_trace_formula(p), rel=1e-9, abs=1e-9)
            expected = IsometryKind.LOXODROMIC if ratio > 1 else IsometryKind.REGULAR_ELLIPTIC
            assert cls.kind == expected, ratio

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_verdict_across_threshold(self, n):
        verdicts = [trigroup_service.certify(trigroup_service.params_from_t(n, f * threshold(n))).verdict
                    for f in (0.9, 1.0, 1.1)]
        assert verdicts == [Verdict.FAILED, Verdict.BOUNDARY, Verdict.CERTIFIED]

    def test_wb_reported(self, params_3_1):
        cert = trigroup_service.certify(params_3_1)
        w_b = trigroup_service.word_isometries(params_3_1)["W_B"]
        assert cert.wb_type == trigroup_service.wb_type(params_3_1).kind
        assert cert.wb_type == cproj_service.classify_isometry(w_b).kind


class TestSpheres:
    def test_b_sphere(self, params_3_1):
        assert trigroup_service.radius(params_3_1, 1) == pytest.approx(2 / math.sqrt(5))

    def test_base_sphere_is_cached_per_parameters(self):
        p = trigroup_service.params_from_t(3, 0.8)
        first = trigroup_service.base_sphere(p, 1)
        assert trigroup_service.base_sphere(trigroup_service.params_from_t(3, 0.8), 1) is first
        assert trigroup_service.base_sphere(p, 2) is not first

    @pytest.mark.parametrize("n, t", [(3, 1.0), (3, 0.4), (3, 2.5), (4, 1.0)])
    def test_closed_form_radius(self, n, t):
        p = trigroup_service.params_from_t(n, t)
        for j in range(1, n):
            assert trigroup_service.closed_form_radius(n, j, t) == pytest.approx(
                trigroup_service.radius(p, j), rel=1e-9)

    def test_n4_radii(self):
        assert trigroup_service.closed_form_radius(4, 1, 1.0) == pytest.approx(math.sqrt(2 / 3))
        assert trigroup_service.closed_form_radius(4, 2, 1.0) == pytest.approx(1 / math.sqrt(3))

    @pytest.mark.parametrize("j", [1, 2])
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_closed_form_centres(self, params_3_1, j, k):
        expected = trigroup_service.closed_form_center(3, j, k, 1.0)
        c = trigroup_service.center(params_3_1, j, k)
        assert c.z == pytest.approx(expected.z, abs=1e-9)
        assert c.t == pytest.approx(expected.t, abs=1e-9)

    def test_translation_law(self):
        p = trigroup_service.params_from_t(4, 0.8)
        family = trigroup_service.sphere_family(p, k_max=2)
        assert len(family.radii) == 3
        assert trigroup_service.translation_law_residual(family) < 1e-9


class TestMargins:
    def test_n3_values(self, params_3_1):
        assert trigroup_service.rho(params_3_1, 2, 1, 1) == pytest.approx(0.7409, abs=1e-4)
        assert trigroup_service.rho(params_3_1, 1, 1, 1) == pytest.approx(0.4744, abs=1e-4)

    @pytest.mark.parametrize("t", [0.3, 0.7, 1.0, 2.0])
    def test_n3_closed_form(self, t):
        p = trigroup_service.params_from_t(3, t)
        assert trigroup_service.closed_form_rho(3, 2, 1, 1, t) == pytest.approx(
            trigroup_service.rho(p, 2, 1, 1), abs=1e-9)

    def test_closed_form_roots(self):
        assert trigroup_service.closed_form_rho(3, 2, 1, 1, 1 / math.sqrt(3)) == pytest.approx(0.0, abs=1e-12)
        assert trigroup_service.closed_form_rho(4, 2, 2, 1, math.sqrt(2) - 1) == pytest.approx(0.0, abs=1e-12)

    def test_n4_outer_margin_root(self):
        root = math.sqrt(2) - 1
        assert trigroup_service.closed_form_rho(4, 3, 1, 1, root) == pytest.approx(0.0, abs=1e-12)
        assert trigroup_service.margin_root(4, (3, 1, 1), 0.3, 0.6) == pytest.approx(root, abs=1e-6)

    @pytest.mark.parametrize("triple", [(3, 1, 1), (2, 2, 1)])
    @pytest.mark.parametrize("t", [0.2, 0.5, 1.0, 2.0])
    def test_n4_closed_form(self, triple, t):
        p = trigroup_service.params_from_t(4, t)
        assert trigroup_service.closed_form_rho(4, *triple, t) == pytest.approx(
            trigroup_service.rho(p, *triple), abs=1e-9)

    @pytest.mark.parametrize("triple", N5_TRIPLES)
    @pytest.mark.parametrize("t", [0.2, 0.5, 1.0, 2.0])
    def test_n5_closed_form(self, triple, t):
        p = trigroup_service.params_from_t(5, t)
        assert trigroup_service.closed_form_rho(5, *triple, t) == pytest.approx(
            trigroup_service.rho(p, *triple), abs=1e-9)

    @pytest.mark.parametrize("triple", N5_TRIPLES)
    def test_n5_roots_at_threshold(self, triple):
        root = math.sqrt(1 - 2 / math.sqrt(5))
        assert root == pytest.approx(threshold(5))
        assert trigroup_service.closed_form_rho(5, *triple, root) == pytest.approx(0.0, abs=1e-9)
        assert trigroup_service.margin_root(5, triple, 0.9 * root, 1.1 * root) == pytest.approx(root, abs=1e-6)

    def test_margin_root(self):
        root = trigroup_service.margin_root(3, (2, 1, 1), 0.3, 1.0)
        assert root == pytest.approx(1 / math.sqrt(3), abs=1e-10)

    def test_margin_root_needs_sign_change(self):
        with pytest.raises(ProcessingError):
            trigroup_service.margin_root(3, (2, 1, 1), 0.8, 1.5)

    def test_unknown_closed_form(self):
        with pytest.raises(ValidationError):
            trigroup_service.closed_form_rho(7, 1, 1, 1, 1.0)

    def test_index_range(self, params_3_1):
        with pytest.raises(ValidationError):
            trigroup_service.rho(params_3_1, 3, 1, 1)

    def test_n6_witness(self):
        p = trigroup_service.params_from_t(6, math.tan(math.pi / 12) + 1e-3)
        assert trigroup_service.rho(p, 1, 1, 1) < 0


class TestTangency:
    @pytest.mark.parametrize("n, t", [(3, 1.0), (4, 0.8), (5, 2.0)])
    def test_spheres_touch_at_fixed_point(self, n, t):
        spheres_gap, point_gap = trigroup_service.tangency_check(trigroup_service.params_from_t(n, t))
        assert spheres_gap < 1e-8
        assert point_gap < 1e-8

    def test_orbit(self, params_3_1):
        assert trigroup_service.tangency_orbit_check(params_3_1, 0) < 1e-8


class TestCertificate:
    def test_certified(self, params_3_1):
        cert = trigroup_service.certify(params_3_1)
        assert cert.verdict == Verdict.CERTIFIED
        assert cert.k_bound == 2
        assert len(cert.entries) == 7
        assert cert.witness is None
        assert cert.wa_type == IsometryKind.LOXODROMIC

    def test_failed(self):
        cert = trigroup_service.certify(trigroup_service.params_from_t(3, 0.3))
        assert cert.verdict == Verdict.FAILED
        assert cert.min_margin < 0
        assert cert.witness.rho == cert.min_margin

    def test_boundary(self):
        cert = trigroup_service.certify(trigroup_service.params_from_t(3, 1 / math.sqrt(3)))
        assert cert.verdict == Verdict.BOUNDARY
        assert (cert.witness.jprime, cert.witness.j, cert.witness.k) == (2, 1, 1)

    def test_n6_fails_above_threshold(self):
        cert = trigroup_service.certify(trigroup_service.params_from_t(6, math.tan(math.pi / 12) + 1e-3))
        assert cert.verdict == Verdict.FAILED


class TestSweep:
    def test_crossing_located(self):
        table = trigroup_service.certify_sweep(3, np.linspace(0.3, 1.0, 8))
        assert table.threshold == pytest.approx(1 / math.sqrt(3))
        assert len(table.rows) == 8 * 7
        roots = [c.t for c in table.crossings if (c.jprime, c.j, c.k) == (2, 1, 1)]
        assert roots == [pytest.approx(1 / math.sqrt(3), abs=1e-9)]

    def test_empty_grid(self):
        with pytest.raises(ValidationError):
            trigroup_service.certify_sweep(3, [])
