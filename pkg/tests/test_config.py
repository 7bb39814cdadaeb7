import math

import pytest

from thzscatter.config import (
    PRESETS,
    load_preset,
    loads_materials,
    loads_scenario,
    parse_angle_grid,
    parse_frequency,
    resolve_material,
)
from thzscatter.emcore import SPEED_OF_LIGHT_ROUNDED, LossFactorVariant, Polarization
from thzscatter.errors import ConfigError, DomainError, ParseError
from thzscatter.rcs import RcsPolarization


@pytest.mark.parametrize("text, hz", [("500GHz", 500e9), ("1 THz", 1e12), ("142e9", 142e9),
                                      ("10 mhz", 10e6), (2.5e9, 2.5e9)])
def test_parse_frequency(text, hz):
    assert parse_frequency(text) == hz


def test_parse_frequency_errors():
    with pytest.raises(ConfigError):
        parse_frequency("fast")
    with pytest.raises(DomainError):
        parse_frequency("-3GHz")


def test_angle_grid():
    assert parse_angle_grid("1:89:1") == [float(k) for k in range(1, 90)]
    assert parse_angle_grid("1, 30,45") == [1.0, 30.0, 45.0]
    assert parse_angle_grid("-80:80:10")[-1] == 80.0
    with pytest.raises(ConfigError):
        parse_angle_grid("1:2")


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    sc = load_preset(name)
    assert sc.name == name
    assert sc.materials and sc.frequencies and sc.theta_i


def test_table2_preset_convention():
    sc = load_preset("table2")
    assert sc.cfg.speed_of_light == SPEED_OF_LIGHT_ROUNDED
    assert sc.cfg.loss_factor_variant is LossFactorVariant.AMENT
    assert sc.polarization is Polarization.PERPENDICULAR
    assert (sc.link.d_t, sc.link.d_r) == (50.0, 50.0)
    assert sc.tx.aperture == pytest.approx(5e-4)
    assert [round(math.degrees(t)) for t in sc.theta_i] == [1, 30, 45, 60, 90]
    assert sc.frequencies == (500e9,)


def test_fig_presets():
    a = load_preset("fig4a")
    assert a.frequencies == (1e9, 10e9, 100e9, 1e12)
    assert len(a.theta_i) == 89
    assert a.rcs.polarization is RcsPolarization.HH


def test_material_keys_are_strict():
    text = "[m]\nname = m\neps_r = 2\nh_rms_um = 1\nl_c_um = 1\ns_coeff = 0.1\nalpha_r = 1\nalpha_i = 1\nlambda_mix = 1\n"
    assert loads_materials(text)[0].h_rms == 1e-6
    with pytest.raises(ConfigError):
        loads_materials(text + "colour = red\n")
    with pytest.raises(ConfigError):
        loads_materials(text.replace("s_coeff = 0.1\n", ""))


def test_material_syntax_error_has_line():
    with pytest.raises(ParseError) as info:
        loads_materials("[m]\nname = m\nthis line is broken\n", "x.cfg")
    assert "x.cfg:" in str(info.value)


def test_resolve_material():
    assert resolve_material("rough").eps_r == 2.0
    with pytest.raises(ConfigError):
        resolve_material("granite")


def test_scenario_errors():
    with pytest.raises(ConfigError):
        loads_scenario("[scenario]\nname = x\n")
