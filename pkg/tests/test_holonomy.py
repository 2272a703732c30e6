import math

import numpy as np
import pytest

from conftest import assert_close
from dualgrass import holonomy as hol
from dualgrass.errors import BlockLeakage, ConfigError, NonClosedCurve, PreconditionError, QuadratureNotConverged
from dualgrass.holonomy import (CCW_PHASE_SIGN, HolonomyReport, IntegratorConfig, Reparametrized, Transport,
                                holonomy_sweep, horizontal_holonomy, is_monotone_in_area, predicted_phase,
                                su11_chart, su11_expected, transport, verify_area_law,
                                verify_su11_consistency, verify_um_side, wrap_angle)
from dualgrass.lie import fiber_closed_form
from dualgrass.matrix import Signature, group_inverse
from dualgrass.sampling import classifier_instance, random_cone, rng_for
from dualgrass.surface import CurveSpec, QuadratureConfig, SurfaceChart

FAST = IntegratorConfig(steps=1024)
SQUARE = [(-0.8, -0.8), (0.9, -0.7), (0.8, 0.9), (-0.7, 0.8)]


def disk_area(n, lam, r):
    return n * 0.5 * math.pi * (math.cosh(2 * math.sqrt(lam) * r) - 1)


@pytest.fixture(scope="module")
def chart22():
    return SurfaceChart.complex_surface(random_cone(rng_for(41), 2, 2, 2.0))


class TestConfig:
    def test_defaults(self):
        c = IntegratorConfig()
        assert (c.steps, c.order, c.renormalize_every) == (4096, 4, 64)

    @pytest.mark.parametrize("kw", [{"steps": 4}, {"order": 3}, {"renormalize_every": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            IntegratorConfig(**kw)

    def test_json(self):
        c = IntegratorConfig(512, 2, 16)
        assert IntegratorConfig.from_json(c.to_json()) == c


def test_wrap_angle():
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert wrap_angle(0.25) == 0.25


class TestBasics:
    def test_constant_curve(self, chart22):
        rep = horizontal_holonomy(chart22, CurveSpec.circle(0.0), FAST)
        assert np.array_equal(rep.V_full, np.eye(4)) and rep.theta == 0.0

    def test_not_closed(self, chart22):
        half = Reparametrized(CurveSpec.circle(0.5), lambda t: 0.5 * t, lambda t: 0.5 + 0 * t)
        with pytest.raises(NonClosedCurve):
            horizontal_holonomy(chart22, half, FAST, area=1.0)

    def test_leakage_detected(self, chart22, monkeypatch):
        def leaky(chart, path, cfg=None, backend=None):
            V = np.eye(4, dtype=complex)
            V[0, 3] = V[3, 0] = 1e-3
            return Transport(V, 8, 0.0)

        monkeypatch.setattr(hol, "transport", leaky)
        with pytest.raises(BlockLeakage):
            horizontal_holonomy(chart22, CurveSpec.circle(0.5), FAST)

    def test_flat_chart_trivial(self):
        chart = SurfaceChart.from_pair([[1], [0]], [[0], [1]])
        for r in (0.5, 1.0):
            rep = horizontal_holonomy(chart, CurveSpec.circle(r), FAST)
            assert np.linalg.norm(rep.V_n - 1) <= 1e-6
            assert rep.predicted == 0.0 and abs(rep.theta) <= 1e-6

    def test_blocks_stay_unitary(self, chart22):
        rep = horizontal_holonomy(chart22, CurveSpec.ellipse(1.1, 0.6, (0.1, 0.2)), FAST)
        assert_close(rep.V_n.conj().T @ rep.V_n, np.eye(2), 1e-12)
        assert_close(rep.V_m.conj().T @ rep.V_m, np.eye(2), 1e-12)

    def test_report_json(self, chart22):
        obj = horizontal_holonomy(chart22, CurveSpec.circle(0.3), FAST).to_json()
        for key in ("theta", "area", "predicted", "law_residual", "offdiag_residual", "scalar_residual",
                    "V_n", "V_m"):
            assert key in obj

    def test_steps_aligned_to_edges(self, chart22):
        tri = CurveSpec.polygon([(0, 0), (1, 0), (0, 1)])
        assert transport(chart22, tri, IntegratorConfig(steps=256)).steps == 258


class TestGoldenCase:
    def test_orientation_sign(self):
        # n = m = 1, ccw circle of radius 0.5: the measured phase is +2A.
        chart = su11_chart()
        curve = CurveSpec.circle(0.5)
        rep = horizontal_holonomy(chart, curve)
        A = rep.area
        assert A == pytest.approx(disk_area(1, 1, 0.5), rel=1e-9)
        assert abs(np.exp(1j * rep.theta) - np.exp(2j * A)) <= 1e-6
        assert abs(np.exp(1j * rep.theta) - np.exp(-2j * A)) > 1e-2
        assert CCW_PHASE_SIGN == 1

    def test_su11_closed_form(self):
        assert verify_su11_consistency(radius=0.7) <= 1e-6

    def test_small_loops(self):
        res = [verify_su11_consistency(FAST, radius=r) for r in (0.1, 0.05)]
        assert max(res) <= 1e-10

    def test_su11_expected_is_fiber(self):
        # exp(2A Phi) is the fiber element at angle 2A.
        assert_close(su11_expected(0.4), fiber_closed_form([[1.0]], 0.8), 1e-14)


class TestAreaLaw:
    def test_nested_circles(self, chart22):
        rows = verify_area_law(chart22, [CurveSpec.circle(r) for r in (0.2, 0.4, 0.8)])
        assert all(r.residual <= 1e-6 for r in rows)
        assert is_monotone_in_area(rows)

    def test_reversed_negates(self, chart22):
        for r in (0.2, 0.4, 0.8):
            c = CurveSpec.circle(r)
            a = horizontal_holonomy(chart22, c, FAST)
            b = horizontal_holonomy(chart22, c.reversed(), FAST)
            assert abs(np.exp(1j * (a.theta + b.theta)) - 1) <= 1e-9

    def test_wraps(self):
        chart = su11_chart()
        rep = horizontal_holonomy(chart, CurveSpec.circle(1.0))
        assert 2 * rep.area > np.pi
        assert rep.law_residual <= 1e-6
        assert rep.theta_unwrapped == pytest.approx(2 * rep.area, rel=1e-9)

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_other_curves(self, lam):
        chart = SurfaceChart.complex_surface(random_cone(rng_for(3, int(lam * 10)), 3, 2, lam))
        for c in (CurveSpec.ellipse(0.8, 0.3, (0.2, -0.1)), CurveSpec.polygon(SQUARE, "cw")):
            rep = horizontal_holonomy(chart, c)
            assert rep.law_residual <= 1e-6
            assert rep.scalar_residual <= 1e-6 and rep.offdiag_residual <= 1e-6

    def test_rotated_generator(self):
        # Y = alpha X + beta iX is the same surface, reparametrized linearly.
        rng = rng_for(8)
        X, Y = classifier_instance(rng, Signature(2, 3), "ComplexSurface")
        chart = SurfaceChart.from_pair(X, Y)
        rep = horizontal_holonomy(chart, CurveSpec.circle(0.4))
        assert rep.law_residual <= 1e-6

    def test_sign_flips_with_orientation(self, chart22):
        c = CurveSpec.circle(0.3)
        assert predicted_phase(chart22, c.reversed(), 1.0) == -predicted_phase(chart22, c, 1.0)

    def test_requires_complex(self):
        with pytest.raises(PreconditionError):
            verify_area_law(SurfaceChart.from_pair([[1], [0]], [[0], [1]]), [CurveSpec.circle(0.3)])


class TestUmSide:
    def test_constant(self, chart22):
        assert verify_um_side(chart22, CurveSpec.circle(0.0)) == 0.0

    def test_lambda_two(self):
        X = np.sqrt(2) * np.array([[1.0], [0.0]])
        chart = SurfaceChart.complex_surface(X)
        assert verify_um_side(chart, CurveSpec.circle(0.5)) <= 1e-6

    def test_phase_invariance(self):
        X = random_cone(rng_for(4), 3, 1, 1.5)
        a = verify_um_side(SurfaceChart.complex_surface(X), CurveSpec.circle(0.5), FAST)
        b = verify_um_side(SurfaceChart.complex_surface(np.exp(0.9j) * X), CurveSpec.circle(0.5), FAST)
        assert a <= 1e-6 and b <= 1e-6


class TestInvariance:
    def test_gauge(self, chart22):
        c = CurveSpec.ellipse(0.9, 0.5, (0.1, 0.0))
        a = transport(chart22, c).V_full
        b = transport(chart22, Reparametrized(c, lambda t: t * t, lambda t: 2 * t)).V_full
        assert np.linalg.norm(a - b) <= 1e-7

    def test_inverse_law(self, chart22):
        sig = chart22.sig
        for c in (CurveSpec.circle(0.6), CurveSpec.polygon(SQUARE)):
            V = transport(chart22, c).V_full
            W = transport(chart22, c.reversed()).V_full
            assert np.linalg.norm(W - group_inverse(sig, V)) <= 1e-7

    def test_order_two_consistent(self, chart22):
        c = CurveSpec.circle(0.5)
        a = transport(chart22, c, IntegratorConfig(order=2)).V_full
        b = transport(chart22, c, IntegratorConfig(order=4)).V_full
        assert np.linalg.norm(a - b) <= 1e-8

    def test_polygon_orders(self, chart22):
        c = CurveSpec.polygon(SQUARE)
        for order in (2, 4):
            errs = []
            for N in (256, 512):
                ref = transport(chart22, c, IntegratorConfig(4 * N, order)).V_full
                errs.append(np.linalg.norm(transport(chart22, c, IntegratorConfig(N, order)).V_full - ref))
            assert math.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.3)


class TestSweep:
    def test_order_and_parallel(self, chart22):
        curves = [CurveSpec.circle(r) for r in (0.6, 0.2, 0.4)]
        a = holonomy_sweep(chart22, curves, FAST, jobs=1)
        b = holonomy_sweep(chart22, curves, FAST, jobs=3)
        assert [x.area for x in a] == [x.area for x in b]
        assert all(np.array_equal(x.V_full, y.V_full) for x, y in zip(a, b))
        assert a[1].area < a[2].area < a[0].area

    def test_errors_per_row(self, chart22):
        q = QuadratureConfig(radial=1, angular=3, max_refinements=1, rtol=1e-15)
        out = holonomy_sweep(chart22, [CurveSpec.circle(0.0), CurveSpec.circle(1.5)], FAST, q)
        assert isinstance(out[0], HolonomyReport)
        assert isinstance(out[1], QuadratureNotConverged)
