"""Configuration grammar: dotted keys, pi expressions, defaults, round trip."""

import math

import pytest

from lzsweep.config import (
    ConfigError,
    RunConfig,
    apply_setting,
    load_config,
    parse_config,
    parse_number,
)


def test_defaults_match_baseline():
    c = RunConfig()
    assert c.pulse_duration == 5.0
    assert c.pulse_cep == pytest.approx(math.pi / 2.0)
    assert c.pulse_photon_energy == 1.55
    assert c.material_fermi_velocity == 1.0
    assert c.dephasing_t2 == math.inf
    assert c.grid_gamma_points == 120
    assert c.grid_k0_points == 257
    assert c.engine_tolerance == 1e-10


def test_parse_number_expressions():
    assert parse_number("pi/2") == pytest.approx(math.pi / 2.0)
    assert parse_number("2*pi") == pytest.approx(2.0 * math.pi)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("3pi/4") == pytest.approx(0.75 * math.pi)
    assert parse_number("1.5e-3") == 1.5e-3
    assert parse_number("inf") == math.inf
    assert parse_number("off") == math.inf


def test_parse_config_basic():
    text = """
# comment line
pulse.duration = 7.5
pulse.cep = pi/4
dephasing.t2 = off
grid.m_points = 40
"""
    c = parse_config(text)
    assert c.pulse_duration == 7.5
    assert c.pulse_cep == pytest.approx(math.pi / 4.0)
    assert c.dephasing_t2 == math.inf
    assert c.grid_m_points == 40
    # untouched keys keep their defaults
    assert c.pulse_photon_energy == 1.55


def test_unknown_key_rejected_with_position():
    with pytest.raises(ConfigError) as exc:
        parse_config("pulse.duration = 5\npulse.durration = 6\n")
    assert exc.value.line == 2


def test_bad_value_rejected():
    with pytest.raises(ConfigError):
        parse_config("pulse.duration = banana\n")
    with pytest.raises(ConfigError):
        parse_config("pulse.duration = -3\n")
    with pytest.raises(ConfigError):
        parse_config("grid.m_points = 2.5\n")


def test_missing_equals_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config("pulse.duration 5\n")
    assert exc.value.line == 1


def test_apply_setting_overlay():
    c = RunConfig()
    c2 = apply_setting(c, "pulse.peak_field", "2.5")
    assert c2.pulse_peak_field == 2.5
    assert c.pulse_peak_field == 1.0  # original untouched
    with pytest.raises(ConfigError):
        apply_setting(c, "nope.nope", "1")


def test_canonical_round_trip():
    c = parse_config("pulse.cep = pi/3\nengine.tolerance = 1e-8\n"
                     "grid.gamma_points = 17\n")
    c2 = parse_config(c.canonical_text())
    assert c2 == c


def test_load_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("material.gap = 0.8\n")
    c = load_config(str(p))
    assert c.material_gap == 0.8


def test_grid_spec_and_thresholds_views():
    c = parse_config("grid.gamma_points = 10\ngrid.m_points = 12\n"
                     "classifier.gamma_boundary = 1.2\n")
    spec = c.grid_spec()
    assert spec.gamma_count == 10 and spec.m_count == 12
    assert c.thresholds().gamma_boundary == 1.2
    assert len(spec.gamma_axis()) == 10
    assert len(spec.m_axis()) == 12
