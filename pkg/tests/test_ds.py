import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from thzscatter.ds import (
    ANGULAR_FLOOR,
    FVariant,
    ScatterGeometry,
    TxParams,
    aperture_to_gain,
    dual_lobe_shape,
    f_alpha_r,
    lobe_factor,
    peak_field_sq,
    power_from_field,
    scattered_field_sq_dual,
    scattered_field_sq_single,
)
from thzscatter.emcore import INTERMEDIATE, ROUGH, SMOOTH, IncidentWave, PhysicsConfig
from thzscatter.errors import DomainError, SingularityError

C3 = PhysicsConfig.paper_repro()
TX = TxParams(p_t=10.0, aperture=5e-4)


def literal_oracle(alpha, theta_i):
    with mpmath.workdps(30):
        f = lambda t: ((1 + mpmath.cos(t - theta_i)) / 2) ** alpha * mpmath.sin(t)
        return float(mpmath.quad(f, [-mpmath.pi / 2, 0, theta_i, mpmath.pi / 2]))


def wave(deg, f=500e9):
    return IncidentWave(f, math.radians(deg))


class TestFAlpha:
    def test_literal_alpha_one(self):
        assert f_alpha_r(1.0, math.radians(30)) == pytest.approx(math.pi / 8, rel=1e-12)

    @pytest.mark.parametrize("alpha, expected", [(1.0, 0.75), (2.0, 7.0 / 12.0)])
    def test_hemisphere(self, alpha, expected):
        for deg in (0, 30, 90):
            assert f_alpha_r(alpha, math.radians(deg), FVariant.HEMISPHERE) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("deg", np.linspace(1, 90, 45))
    def test_literal_closed_form(self, deg):
        t = math.radians(deg)
        assert f_alpha_r(1.0, t) == pytest.approx(math.pi / 4 * math.sin(t), rel=1e-9)

    @pytest.mark.parametrize("alpha, deg", [(2.0, 10), (4.0, 30), (10.0, 60), (100.0, 45), (3.5, 85)])
    def test_literal_against_mpmath(self, alpha, deg):
        t = math.radians(deg)
        assert f_alpha_r(alpha, t) == pytest.approx(literal_oracle(alpha, t), rel=1e-9)

    def test_angular_floor(self):
        with pytest.raises(SingularityError):
            f_alpha_r(1.0, 0.0)
        with pytest.raises(SingularityError):
            f_alpha_r(1.0, ANGULAR_FLOOR / 2)
        assert f_alpha_r(1.0, 0.0, FVariant.HEMISPHERE) == pytest.approx(0.75)

    def test_domain(self):
        with pytest.raises(DomainError):
            f_alpha_r(0.5, 0.3)
        with pytest.raises(DomainError):
            f_alpha_r(1.0, -0.1)


class TestLobe:
    @given(st.floats(-math.pi, math.pi), st.floats(1, 1000))
    def test_bounded(self, psi, alpha):
        v = lobe_factor(psi, alpha)
        assert 0.0 <= v <= 1.0

    @given(st.floats(0, math.pi), st.floats(0, math.pi), st.floats(1, 100))
    def test_decreasing_in_abs_psi(self, a, b, alpha):
        lo, hi = sorted((a, b))
        assert lobe_factor(hi, alpha) <= lobe_factor(lo, alpha)
        assert lobe_factor(-hi, alpha) <= lobe_factor(lo, alpha)

    @given(st.floats(0.01, math.pi), st.floats(1, 100), st.floats(1, 100))
    def test_decreasing_in_alpha(self, psi, a1, a2):
        lo, hi = sorted((a1, a2))
        assert lobe_factor(psi, hi) <= lobe_factor(psi, lo)

    def test_peak(self):
        assert lobe_factor(0.0, 7.0) == 1.0

    @given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(0, 1),
           st.floats(1, 100), st.floats(1, 100))
    def test_dual_is_convex_combination(self, psi, psi_i, lam, ar, ai):
        f = lobe_factor(psi, ar)
        b = lobe_factor(psi_i, ai)
        d = dual_lobe_shape(psi, psi_i, lam, ar, ai)
        assert min(f, b) - 1e-15 <= d <= max(f, b) + 1e-15


class TestGeometry:
    @given(st.floats(0, math.pi / 2))
    def test_monostatic_exact(self, t):
        g = ScatterGeometry.monostatic(t, 50.0, 10.0)
        assert g.psi == -2.0 * t
        assert g.psi_i == 0.0
        assert g.theta_s == -t

    def test_at_angle(self):
        g = ScatterGeometry.at_angle(0.3, 0.5, 1.0, 2.0, 3.0)
        assert g.psi == pytest.approx(0.2)
        assert g.psi_i == pytest.approx(0.8)
        assert ScatterGeometry.specular(0.3, 1.0, 1.0, 1.0).psi == 0.0

    @pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, 0)])
    def test_positive_distances(self, args):
        with pytest.raises(DomainError):
            ScatterGeometry.at_angle(0.1, 0.1, *args)


class TestTx:
    def test_exactly_one_mode(self):
        with pytest.raises(DomainError):
            TxParams(1.0)
        with pytest.raises(DomainError):
            TxParams(1.0, g_t=2.0, aperture=1e-4)

    def test_constant_aperture_gain(self):
        w = wave(0)
        lam = 0.6e-3
        assert TX.tx_gain(w, C3) == pytest.approx(4 * math.pi * 5e-4 / lam ** 2, rel=1e-14)
        assert TX.receive_gain(w, C3) == TX.tx_gain(w, C3)
        assert TX.k_const(w, C3) == pytest.approx(math.sqrt(60 * 10 * TX.tx_gain(w, C3)), rel=1e-15)


class TestField:
    def geom(self, deg, d=50.0):
        return ScatterGeometry.specular(math.radians(deg), d, d, 10.0)

    def test_peak_equals_single_at_specular(self):
        w = wave(30)
        g = self.geom(30)
        assert scattered_field_sq_single(ROUGH, w, g, TX, C3) == peak_field_sq(ROUGH, w, g, TX, C3)

    def test_peak_closed_form(self):
        w = wave(30)
        k2 = 60 * 10 * TX.tx_gain(w, C3)
        expected = (0.5 ** 2 * k2 / 50.0 ** 4) * 10.0 * math.cos(w.theta_i) / (math.pi / 8)
        assert peak_field_sq(ROUGH, w, self.geom(30), TX, C3) == pytest.approx(expected, rel=1e-12)

    def test_angle_step_30_to_45(self):
        # with a fixed gain the angle dependence is l cos / F = cot(theta) / (pi/4)
        tx = TxParams(10.0, g_t=100.0)
        a = scattered_field_sq_single(ROUGH, wave(30), self.geom(30), tx, C3)
        b = scattered_field_sq_single(ROUGH, wave(45), self.geom(45), tx, C3)
        assert 10 * math.log10(a / b) == pytest.approx(2.39, abs=0.01)
        assert a / b == pytest.approx(math.sqrt(3), rel=1e-9)

    def test_s_scaling(self):
        w, g = wave(45), self.geom(45)
        a = scattered_field_sq_single(SMOOTH.with_(s_coeff=0.05), w, g, TX, C3)
        b = scattered_field_sq_single(SMOOTH.with_(s_coeff=0.5), w, g, TX, C3)
        assert b / a == pytest.approx(100.0, rel=1e-12)

    def test_distance_scaling(self):
        w = wave(45)
        a = scattered_field_sq_single(ROUGH, w, self.geom(45, 50.0), TX, C3)
        b = scattered_field_sq_single(ROUGH, w, self.geom(45, 100.0), TX, C3)
        assert 10 * math.log10(b / a) == pytest.approx(-12.0412, abs=1e-4)

    def test_dual_reduces_to_single(self):
        w = wave(30)
        g = ScatterGeometry.at_angle(w.theta_i, math.radians(-10), 5, 5, 1)
        m = INTERMEDIATE.with_(alpha_r=3.0, alpha_i=5.0, lambda_mix=1.0)
        assert scattered_field_sq_dual(m, w, g, TX, C3) == scattered_field_sq_single(m, w, g, TX, C3)

    def test_pure_back_lobe_at_peak(self):
        w = wave(30)
        g = ScatterGeometry.monostatic(w.theta_i, 5.0, 1.0)
        m = INTERMEDIATE.with_(lambda_mix=0.0, alpha_r=3.0, alpha_i=3.0)
        assert scattered_field_sq_dual(m, w, g, TX, C3) == pytest.approx(peak_field_sq(m, w, g, TX, C3), rel=1e-15)

    def test_half_mix_equal_angles(self):
        w = wave(30)
        g = ScatterGeometry(5.0, 5.0, 1.0, 0.1, 0.4, 0.4)
        m = INTERMEDIATE.with_(lambda_mix=0.5, alpha_r=3.0, alpha_i=3.0)
        single = scattered_field_sq_single(m.with_(lambda_mix=1.0), w, g, TX, C3)
        assert scattered_field_sq_dual(m, w, g, TX, C3) == pytest.approx(single, rel=1e-14)

    def test_grazing_is_zero(self):
        assert scattered_field_sq_single(ROUGH, wave(90), self.geom(90), TX, C3) == 0.0


class TestPowerFromField:
    def test_aperture_form(self):
        assert power_from_field(1.0, aperture=5e-4) == pytest.approx(5e-4 / (120 * math.pi), rel=1e-15)
        assert power_from_field(1.0, aperture=5e-4) == pytest.approx(1.3263e-6, rel=1e-4)
        assert power_from_field(0.0, aperture=5e-4) == 0.0

    def test_forms_agree(self):
        w = wave(0)
        lam = w.wavelength(C3)
        g_r = aperture_to_gain(5e-4, lam)
        assert g_r == pytest.approx(17453.3, rel=1e-5)
        a = power_from_field(2.5, w, g_r=g_r, cfg=C3)
        b = power_from_field(2.5, aperture=5e-4)
        assert a == pytest.approx(b, rel=1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            power_from_field(-1.0, aperture=1.0)
        with pytest.raises(DomainError):
            power_from_field(1.0, wave(0), g_r=1.0, aperture=1.0)
        with pytest.raises(DomainError):
            power_from_field(1.0, g_r=1.0)
