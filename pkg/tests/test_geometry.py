import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poincare_sie.errors import DegenerateCurve, DimensionMismatch, NotElliptic
from poincare_sie.geometry import (
    CharacteristicMap,
    CurveParametrization,
    EllipticCoefficients,
    TrigSeries,
    characteristic_forward,
    characteristic_inverse,
    curve_frame,
    curve_point,
    ellipticity_check,
    image_curve,
    sample_curve,
)

ELLIPSE = CurveParametrization.ellipse(2.0, 1.0)
BITSADZE = (np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]]), -np.eye(2))


def admissible_triples():
    return st.tuples(
        st.floats(0.2, 5.0), st.floats(-3.0, 3.0), st.floats(0.05, 5.0)
    ).map(lambda t: (t[0], t[1], (t[1] ** 2 + t[2]) / t[0]))


class TestCurvePoint:
    def test_unit_circle_at_zero(self):
        assert curve_point(CurveParametrization.unit_circle(), 0.0) == pytest.approx(1.0 + 0j)

    def test_unit_circle_quarter_turn(self):
        assert abs(curve_point(CurveParametrization.unit_circle(), np.pi / 2) - 1j) < 1e-15

    def test_ellipse_table_at_pi(self):
        assert abs(curve_point(ELLIPSE, np.pi) - (-2.0)) < 1e-15

    def test_closed_curve(self):
        assert abs(ELLIPSE.point(0.0) - ELLIPSE.point(2 * np.pi)) < 1e-14


class TestCurveFrame:
    def test_circle_at_zero(self):
        fr = curve_frame(CurveParametrization.unit_circle(), 0.0)
        assert abs(fr.tangent - 1j) < 1e-15
        np.testing.assert_allclose(fr.normal, [1.0, 0.0], atol=1e-15)

    def test_circle_quarter_turn(self):
        fr = curve_frame(CurveParametrization.unit_circle(), np.pi / 2)
        assert abs(fr.tangent + 1.0) < 1e-15
        np.testing.assert_allclose(fr.normal, [0.0, 1.0], atol=1e-15)

    def test_ellipse_normal_points_outward(self):
        np.testing.assert_allclose(curve_frame(ELLIPSE, 0.0).normal, [1.0, 0.0], atol=1e-15)

    @given(st.floats(0.0, 2 * np.pi))
    def test_normal_unit_and_orthogonal(self, theta):
        fr = curve_frame(ELLIPSE, theta)
        nu, tp = fr.normal, complex(fr.tangent)
        assert abs(np.hypot(*nu) - 1.0) < 1e-14
        assert abs(nu[0] * tp.real + nu[1] * tp.imag) < 1e-14

    @given(st.floats(0.0, 2 * np.pi))
    def test_circle_normal_is_radial(self, theta):
        np.testing.assert_allclose(
            curve_frame(CurveParametrization.unit_circle(), theta).normal,
            [np.cos(theta), np.sin(theta)], atol=1e-15,
        )

    def test_degenerate_curve_rejected(self):
        with pytest.raises(DegenerateCurve):
            CurveParametrization("trigonometric", TrigSeries([0.0, 1.0], [0.0, 0.0]), TrigSeries([0.0, 0.0], [0.0, 0.0]))

    def test_clockwise_curve_rejected(self):
        with pytest.raises(DegenerateCurve):
            CurveParametrization("trigonometric", TrigSeries([0.0, 1.0], [0.0, 0.0]), TrigSeries([0.0, 0.0], [0.0, -1.0]))


class TestTrigSeries:
    def test_derivative_of_table(self):
        s = TrigSeries([0.5, 1.0, 0.0], [0.0, 0.0, 2.0])
        th = np.linspace(0, 2 * np.pi, 7)
        np.testing.assert_allclose(s(th, 1), -np.sin(th) + 4 * np.cos(2 * th), atol=1e-14)

    def test_from_samples_recovers_table(self):
        s = TrigSeries([[0.5, 1.0, 0.0]], [[0.0, -0.3, 2.0]])
        th = 2 * np.pi * np.arange(16) / 16
        fit = TrigSeries.from_samples(s(th), 2)
        np.testing.assert_allclose(fit.cos, s.cos, atol=1e-15)
        np.testing.assert_allclose(fit.sin, s.sin, atol=1e-15)

    def test_dict_rejects_unknown(self):
        with pytest.raises(ValueError):
            TrigSeries.from_dict({"cos": [1.0], "sin": [0.0], "tan": [0.0]})

    def test_mismatched_tables(self):
        with pytest.raises(DimensionMismatch):
            TrigSeries([1.0, 2.0], [0.0])


class TestEllipticity:
    def test_bitsadze_elliptic(self):
        res = ellipticity_check(*BITSADZE)
        assert res.elliptic
        assert np.polyval(res.polynomial, 1.0) == pytest.approx(4.0)

    def test_laplace(self):
        assert ellipticity_check(np.eye(1), np.zeros((1, 1)), np.eye(1)).elliptic

    def test_degenerate_scalar(self):
        res = ellipticity_check(np.eye(1), np.eye(1), np.eye(1))
        assert not res.elliptic
        assert res.witness == pytest.approx(-1.0, abs=1e-6)

    @given(admissible_triples())
    def test_admissible_triples_are_elliptic(self, abc):
        a, b, c = abc
        assert ellipticity_check(np.diag([a]), np.diag([b]), np.diag([c])).elliptic

    @given(st.floats(0.2, 5.0), st.floats(-3.0, 3.0), st.floats(0.0, 2.0))
    def test_non_positive_discriminant_is_not_elliptic(self, a, b, deficit):
        c = (b * b - deficit) / a
        assert not ellipticity_check(np.diag([a]), np.diag([b]), np.diag([c])).elliptic

    def test_coefficients_reject_parabolic(self):
        with pytest.raises(NotElliptic):
            EllipticCoefficients([1.0], [1.0], [1.0])


class TestCharacteristicMap:
    def test_identity_for_laplace(self):
        m = EllipticCoefficients.laplace(1).maps()[0]
        assert characteristic_forward(m, (3.0, 4.0)) == pytest.approx(3 + 4j)

    def test_shear_example(self):
        m = CharacteristicMap(0, 1.0, 1.0, 2.0)
        assert characteristic_forward(m, (1.0, 1.0)) == pytest.approx(1.0 + 0j)

    def test_stretch_example(self):
        m = CharacteristicMap(0, 4.0, 0.0, 1.0)
        assert characteristic_forward(m, (1.0, 1.0)) == pytest.approx(0.5 + 1j)

    @given(admissible_triples(), st.integers(0, 2**32 - 1))
    def test_round_trip(self, abc, seed):
        m = CharacteristicMap(0, *abc)
        z = np.array([1.0, 1j]) @ np.random.default_rng(seed).normal(size=(2, 10_000)) * 10
        back = characteristic_inverse(m, characteristic_forward(m, z))
        assert np.max(np.abs(back - z) / np.maximum(1.0, np.abs(z))) < 1e-12

    @given(admissible_triples())
    def test_jacobian_is_inverse_delta(self, abc):
        m = CharacteristicMap(0, *abc)
        h = 1e-3
        p = 0.3 + 0.7j
        dx = (m.forward(p + h) - m.forward(p - h)) / (2 * h)
        dy = (m.forward(p + 1j * h) - m.forward(p - 1j * h)) / (2 * h)
        jac = dx.real * dy.imag - dx.imag * dy.real
        assert jac == pytest.approx(1.0 / m.delta, rel=1e-12)
        assert np.linalg.det(m.jacobian) == pytest.approx(1.0 / m.delta, rel=1e-12)

    def test_maps_carry_equation_to_laplace(self):
        # u = Re(z_j^2) must satisfy a u_xx + 2b u_xy + c u_yy = 0
        m = CharacteristicMap(0, 2.0, 0.5, 1.5)
        zx, zy = m.dz_dx, m.dz_dy
        uxx, uxy, uyy = (2 * zx * zx).real, (2 * zx * zy).real, (2 * zy * zy).real
        assert abs(m.a * uxx + 2 * m.b * uxy + m.c * uyy) < 1e-14


class TestImageCurve:
    theta = np.linspace(0, 2 * np.pi, 33)

    def test_identity_image(self):
        s = image_curve(CurveParametrization.unit_circle(), CharacteristicMap(0, 1.0, 0.0, 1.0), self.theta)
        np.testing.assert_allclose(s.points, np.exp(1j * self.theta), atol=1e-15)

    def test_stretched_circle_is_ellipse(self):
        # x_j = x / 2 and y_j = y, so the semi-axes are 1/2 and 1
        s = image_curve(CurveParametrization.unit_circle(), CharacteristicMap(0, 4.0, 0.0, 1.0), self.theta)
        np.testing.assert_allclose(s.points, 0.5 * np.cos(self.theta) + 1j * np.sin(self.theta), atol=1e-15)

    def test_arc_element_is_mapped_tangent(self):
        m = CharacteristicMap(0, 1.0, 1.0, 2.0)
        s = image_curve(ELLIPSE, m, self.theta)
        np.testing.assert_allclose(s.arc_element, np.abs(m.forward(ELLIPSE.derivative(self.theta))), atol=1e-14)

    def test_orientation_preserved(self):
        s = image_curve(ELLIPSE, CharacteristicMap(0, 1.0, 1.0, 2.0), self.theta)
        assert np.all(np.imag(np.conj(s.points) * s.tangents) > 0)

    def test_sample_curve_second_derivative(self):
        s = sample_curve(ELLIPSE, self.theta)
        np.testing.assert_allclose(s.second, -s.points, atol=1e-14)
