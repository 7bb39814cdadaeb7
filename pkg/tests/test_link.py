import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzscatter.ds import TxParams
from thzscatter.emcore import ROUGH, SMOOTH, TABLE1_MATERIALS, IncidentWave, PhysicsConfig, fresnel_reflection
from thzscatter.errors import DomainError
from thzscatter.link import (
    LinkGeometry,
    compare_scatter_vs_reflection,
    reflected_received_power,
    reflected_received_power_w,
    scattered_received_power_ds,
)

C3 = PhysicsConfig.paper_repro()
TX = TxParams(p_t=10.0, aperture=5e-4)
LINK = LinkGeometry(50.0, 50.0, 10.0, 1.0)


def wave(deg, f=500e9):
    return IncidentWave.deg(f, deg)


class TestReflected:
    @pytest.mark.parametrize("m, deg, expected", [
        (SMOOTH, 1, -6.21), (SMOOTH, 30, -5.58), (SMOOTH, 45, -4.83), (SMOOTH, 60, -3.87),
        (ROUGH, 1, -188.35), (ROUGH, 30, -143.78), (ROUGH, 45, -98.75), (ROUGH, 60, -52.81),
        (ROUGH, 90, -1.58),
    ], ids=lambda v: getattr(v, "name", str(v)))
    def test_published_table(self, m, deg, expected):
        assert reflected_received_power(m, wave(deg), LINK, TX, C3) == pytest.approx(expected, abs=0.1)

    def test_friis_oracle(self):
        w = wave(45)
        lam = 0.6e-3
        g = 4 * math.pi * 5e-4 / lam ** 2
        gamma = fresnel_reflection(16.0, w) * math.exp(-8 * (math.pi * 10e-6 * math.cos(w.theta_i) / lam) ** 2)
        expected = 10 * g * g * lam ** 2 * gamma ** 2 / ((4 * math.pi) ** 2 * 100.0 ** 2)
        assert reflected_received_power_w(SMOOTH, w, LINK, TX, C3) == pytest.approx(expected, rel=1e-12)

    def test_grazing_material_independent(self):
        vals = [reflected_received_power(m, wave(90), LINK, TX, C3) for m in TABLE1_MATERIALS]
        assert max(vals) - min(vals) < 1e-9

    @given(st.sampled_from(TABLE1_MATERIALS), st.floats(1, 90), st.floats(1, 90))
    def test_non_decreasing_in_angle(self, m, a, b):
        lo, hi = sorted((a, b))
        assert reflected_received_power(m, wave(hi), LINK, TX, C3) >= reflected_received_power(m, wave(lo), LINK, TX, C3) - 1e-12


class TestScattered:
    @pytest.mark.parametrize("deg", [1, 30, 45, 60])
    def test_rough_minus_smooth(self, deg):
        r = scattered_received_power_ds(ROUGH, wave(deg), LINK, TX, C3)
        s = scattered_received_power_ds(SMOOTH, wave(deg), LINK, TX, C3)
        assert r - s == pytest.approx(20.0, abs=1e-9)

    def test_rough_steps(self):
        p = {d: scattered_received_power_ds(ROUGH, wave(d), LINK, TX, C3) for d in (1, 30, 45, 60)}
        assert p[30] - p[45] == pytest.approx(2.38, abs=0.05)
        assert p[45] - p[60] == pytest.approx(2.39, abs=0.05)
        assert p[1] - p[30] == pytest.approx(15.2, abs=0.2)

    def test_grazing_negligible(self):
        assert scattered_received_power_ds(ROUGH, wave(90), LINK, TX, C3) == -math.inf

    @given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(1, 89))
    def test_s_squared_scaling(self, s1, s2, deg):
        a = scattered_received_power_ds(ROUGH.with_(s_coeff=s1), wave(deg), LINK, TX, C3)
        b = scattered_received_power_ds(ROUGH.with_(s_coeff=s2), wave(deg), LINK, TX, C3)
        assert b - a == pytest.approx(20 * math.log10(s2 / s1), abs=1e-9)

    def test_backscatter_needs_equal_distances(self):
        with pytest.raises(DomainError):
            scattered_received_power_ds(ROUGH, wave(30), LinkGeometry(10, 20), TX, C3, "backscatter")

    def test_backscatter_below_specular(self):
        spec = scattered_received_power_ds(ROUGH, wave(30), LINK, TX, C3, "specular")
        back = scattered_received_power_ds(ROUGH, wave(30), LINK, TX, C3, "backscatter")
        # alpha = 1 lobe at psi = -60 deg: ((1 + 0.5) / 2)
        assert back - spec == pytest.approx(10 * math.log10(0.75), abs=1e-9)


class TestCompare:
    def test_signs(self):
        r1 = compare_scatter_vs_reflection(ROUGH, wave(1), LINK, TX, C3)
        s1 = compare_scatter_vs_reflection(SMOOTH, wave(1), LINK, TX, C3)
        r60 = compare_scatter_vs_reflection(ROUGH, wave(60), LINK, TX, C3, "x")
        assert r1.difference_db < -100
        assert s1.difference_db > 10
        assert r1.difference_db == pytest.approx(r1.reflected_dbm - r1.scattered_dbm)
        assert r60.convention_id == "x"
        for deg in (1, 30, 45):
            assert compare_scatter_vs_reflection(ROUGH, wave(deg), LINK, TX, C3).difference_db < 0

    def test_grazing_difference(self):
        r = compare_scatter_vs_reflection(ROUGH, wave(90), LINK, TX, C3)
        assert r.difference_db == math.inf
        assert r.components["rho_s"] == 1.0


class TestGeometry:
    def test_validation(self):
        with pytest.raises(DomainError):
            LinkGeometry(0, 1)
        with pytest.raises(DomainError):
            LinkGeometry(1, 2, monostatic=True)
        assert LinkGeometry(3, 4).path_length == 7
