import math

import numpy as np
import pytest

from porism import (
    Ellipse,
    NonConvexTable,
    OrientedLine,
    Point2,
    TrigPoly,
    curve_point,
    focal_distances,
    pedal_foot,
    support_eval,
)

TWO_PI = 2.0 * math.pi

TRIG = TrigPoly(1.0, ((2, 0.01, -0.02), (3, 0.04, 0.01), (5, 0.005, -0.01)))


def central_diff(f, x, step):
    return (f(x + step) - f(x - step)) / (2.0 * step)


class TestSupportEval:
    def test_ellipse_major_axis(self, ellipse):
        h, h1, h2 = support_eval(ellipse, 0.0)
        assert h == pytest.approx(2.0, abs=1e-15)
        assert h1 == pytest.approx(0.0, abs=1e-15)
        # second derivative against central differences of the closed form
        def h_only(psi):
            return math.sqrt(4.0 * math.cos(psi) ** 2 + math.sin(psi) ** 2)
        fd = (h_only(1e-5) - 2.0 * h_only(0.0) + h_only(-1e-5)) / 1e-10
        assert fd == pytest.approx(-1.5, abs=1e-5)
        assert h2 == pytest.approx(-1.5, abs=1e-12)

    def test_circle_is_constant(self, circle):
        for psi in np.linspace(0.0, TWO_PI, 17):
            h, h1, h2 = support_eval(circle, psi)
            assert h == pytest.approx(1.0, abs=1e-15)
            assert h1 == pytest.approx(0.0, abs=1e-15)
            assert h2 == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("curve", [Ellipse(2.0, 1.0), Ellipse(1.7, 0.4), TRIG])
    def test_derivatives_match_finite_differences(self, curve):
        rng = np.random.default_rng(11)
        step = 1e-6
        for psi in rng.uniform(0.0, TWO_PI, 50):
            h, h1, h2 = support_eval(curve, psi)
            fd1 = central_diff(lambda x: curve.support(x)[0], psi, step)
            fd2 = central_diff(lambda x: curve.support(x)[1], psi, step)
            assert h1 == pytest.approx(fd1, rel=1e-6, abs=1e-8)
            assert h2 == pytest.approx(fd2, rel=1e-6, abs=1e-8)
            assert h > 0.0


class TestCurvePoint:
    def test_axis_vertices(self, ellipse):
        assert curve_point(ellipse, 0.0).dist(Point2(2.0, 0.0)) < 1e-14
        assert curve_point(ellipse, math.pi / 2).dist(Point2(0.0, 1.0)) < 1e-14

    def test_matches_normal_parametrization(self, ellipse):
        # independent route: xi = (a1^2 l cos(psi), a2^2 l sin(psi)), l = 1/h
        rng = np.random.default_rng(3)
        for psi in np.append(rng.uniform(0.0, TWO_PI, 30), math.pi / 4):
            h, _, _ = support_eval(ellipse, psi)
            ell = 1.0 / h
            expect = Point2(4.0 * ell * math.cos(psi), 1.0 * ell * math.sin(psi))
            assert curve_point(ellipse, psi).dist(expect) < 1e-12

    def test_points_lie_on_ellipse(self, ellipse):
        psis = np.linspace(0.0, TWO_PI, 101)
        pts = ellipse.points(psis)
        residual = pts[:, 0] ** 2 / 4.0 + pts[:, 1] ** 2 - 1.0
        assert np.max(np.abs(residual)) < 1e-12

    @pytest.mark.parametrize("curve", [Ellipse(2.0, 1.0), TRIG])
    def test_outer_normal_direction(self, curve):
        # gamma'(psi) = (h + h'')(-sin, cos) must be orthogonal to the normal
        rng = np.random.default_rng(4)
        for psi in rng.uniform(0.0, TWO_PI, 40):
            h, h1, h2 = support_eval(curve, psi)
            speed = h + h2
            tangent = np.array([-math.sin(psi), math.cos(psi)]) * speed
            normal = np.array([math.cos(psi), math.sin(psi)])
            assert abs(tangent @ normal) < 1e-12 * abs(speed)
            # and the finite-difference tangent agrees in direction
            step = 1e-6
            a = curve.point(psi + step)
            b = curve.point(psi - step)
            fd = np.array([a.x1 - b.x1, a.x2 - b.x2]) / (2.0 * step)
            assert np.allclose(fd, tangent, rtol=1e-5, atol=1e-5)


class TestPedalFoot:
    def test_axis_aligned(self):
        q = pedal_foot(OrientedLine(1.0, 0.0), Point2(0.0, 0.0))
        assert q.dist(Point2(1.0, 0.0)) < 1e-15

    def test_point_on_line_is_fixed(self):
        line = OrientedLine(0.7, 1.3)
        pt = line.point_at(2.5)
        assert pedal_foot(line, pt).dist(pt) < 1e-12

    def test_against_dense_minimization(self):
        # coarse scan of |X(s) - P| refined by quadratic interpolation
        line = OrientedLine(0.5, math.pi / 3)
        p = Point2(0.3, 0.2)
        s_grid = np.linspace(-5.0, 5.0, 20001)
        pts = np.array([[x.x1, x.x2] for x in (line.point_at(s) for s in s_grid)])
        d2 = (pts[:, 0] - p.x1) ** 2 + (pts[:, 1] - p.x2) ** 2
        i = int(np.argmin(d2))
        # exact parabola through the three nearest samples
        denom = d2[i - 1] - 2.0 * d2[i] + d2[i + 1]
        s_star = s_grid[i] + 0.5 * (d2[i - 1] - d2[i + 1]) / denom * (s_grid[1] - s_grid[0])
        oracle = line.point_at(s_star)
        assert pedal_foot(line, p).dist(oracle) < 1e-9

    def test_foot_offset_parallel_to_normal(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            line = OrientedLine(rng.uniform(-2, 2), rng.uniform(0, TWO_PI))
            p = Point2(rng.uniform(-3, 3), rng.uniform(-3, 3))
            q = pedal_foot(line, p)
            d = np.array([q.x1 - p.x1, q.x2 - p.x2])
            t = np.array(line.direction())
            assert abs(d @ t) < 1e-12
            assert abs(line.signed_offset(q)) < 1e-12


class TestFocalDistances:
    def test_horizontal_line_equidistant(self):
        d1, d2 = focal_distances(OrientedLine(1.0, math.pi / 2), 1.7)
        assert d1 == pytest.approx(1.0, abs=1e-15)
        assert d2 == pytest.approx(1.0, abs=1e-15)

    def test_zero_eccentricity(self):
        d1, d2 = focal_distances(OrientedLine(-0.4, 0.3), 0.0)
        assert d1 == d2 == pytest.approx(0.4, abs=1e-15)

    def test_negative_eccentricity_rejected(self):
        with pytest.raises(ValueError):
            focal_distances(OrientedLine(1.0, 0.0), -1.0)

    def test_product_on_caustic_tangents(self):
        # tangents to the confocal ellipse with bc^2 = 0.2 give d1 d2 = 0.2
        ac, bc = math.sqrt(3.2), math.sqrt(0.2)
        c = math.sqrt(ac * ac - bc * bc)
        assert c == pytest.approx(math.sqrt(3.0), abs=1e-15)
        rng = np.random.default_rng(6)
        for alpha in rng.uniform(0.0, TWO_PI, 100):
            h = math.sqrt(ac * ac * math.cos(alpha) ** 2 + bc * bc * math.sin(alpha) ** 2)
            d1, d2 = focal_distances(OrientedLine(h, alpha), c)
            assert d1 * d2 == pytest.approx(0.2, rel=1e-12)


class TestOrientedLine:
    def test_angle_normalized(self):
        assert OrientedLine(1.0, -0.5).phi == pytest.approx(TWO_PI - 0.5)
        assert OrientedLine(1.0, 7.0).phi == pytest.approx(7.0 - TWO_PI)

    def test_points_satisfy_line_equation(self):
        line = OrientedLine(0.8, 2.1)
        for s in (-3.0, 0.0, 1.7):
            assert abs(line.signed_offset(line.point_at(s))) < 1e-14

    def test_reverse_is_involution(self):
        line = OrientedLine(0.8, 2.1)
        rev = line.reverse()
        assert rev.p == -line.p
        # same carrier: every point of the original satisfies the reversed equation
        assert abs(rev.signed_offset(line.point_at(1.3))) < 1e-14
        rr = rev.reverse()
        assert rr.p == pytest.approx(line.p) and rr.phi == pytest.approx(line.phi)


class TestCurveValidation:
    def test_ellipse_axis_order(self):
        with pytest.raises(ValueError):
            Ellipse(1.0, 2.0)
        with pytest.raises(ValueError):
            Ellipse(1.0, 0.0)

    def test_trig_rejects_order_one(self):
        with pytest.raises(ValueError):
            TrigPoly(1.0, ((1, 0.1, 0.0),))

    def test_trig_rejects_nonconvex(self):
        with pytest.raises(NonConvexTable):
            TrigPoly(1.0, ((3, 0.2, 0.0),))  # (1-9)*0.2 overwhelms c0

    def test_trig_rejects_nonpositive_width(self):
        with pytest.raises(ValueError):
            TrigPoly(0.0)

    def test_circle_special_case(self):
        t = TrigPoly(1.0)
        h, h1, h2 = support_eval(t, 0.7)
        assert (h, h1, h2) == (1.0, 0.0, 0.0)

    def test_origin_offset_translates_curve(self):
        base = TrigPoly(1.0, ((3, 0.04, 0.01),))
        moved = TrigPoly(1.0, ((3, 0.04, 0.01),), origin=(0.3, -0.2))
        for psi in (0.0, 1.0, 2.5):
            a = base.point(psi)
            b = moved.point(psi)
            assert b.x1 - a.x1 == pytest.approx(0.3, abs=1e-14)
            assert b.x2 - a.x2 == pytest.approx(-0.2, abs=1e-14)


def test_point_requires_finite_components():
    with pytest.raises(ValueError):
        Point2(math.nan, 0.0)
    with pytest.raises(ValueError):
        Point2(0.0, math.inf)
