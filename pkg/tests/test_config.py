from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from seamrac.config import (
    RunConfig, default_config, format_config, parse_config, parse_config_text,
)
from seamrac.errors import ParseError, ValidationError


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text("")
    cfg = parse_config(path)
    assert cfg == RunConfig()
    a = cfg.adaptation
    assert a.gamma_x == ((4000.0, 0.0), (0.0, 50.0))
    assert a.gamma_r == 2000.0
    assert a.gamma_theta == ((50.0, 0.0), (0.0, 50.0))
    assert (cfg.backstepping.k1, cfg.backstepping.k2) == (30.0, 10.0)
    assert cfg.controller.A_m == ((0.0, 1.0), (-6.0, -4.0))
    assert cfg.controller.B_m == (0.0, 6.0)
    assert cfg.simulation.dt_control == 0.01
    assert cfg.simulation.initial_state == (0.2, 0.0, 0.0, 0.0)
    assert cfg.plant.mass == 2.0 and cfg.geometry.d3 == 0.0525
    assert cfg.motor.zeta == 47.535


def test_values_and_comments():
    cfg = parse_config_text("""
# hip run
[adaptation]
gamma_x = 1000, 0; 0, 20   # diagonal
freeze = true
[motor]
zeta = auto
[reference]
kind = constant
value = 0.1
""")
    assert cfg.adaptation.gamma_x == ((1000.0, 0.0), (0.0, 20.0))
    assert cfg.adaptation.freeze is True
    assert cfg.motor.zeta is None
    assert cfg.reference(3.0) == 0.1


def test_dt_multiple_rule():
    ok = parse_config_text("[simulation]\ndt_control = 0.015\ndt_physics = 1e-4\n")
    assert ok.simulation.substeps == 150
    assert parse_config_text("[simulation]\ndt_control = 0.0105\ndt_physics = 3e-4\n").simulation.substeps == 35
    with pytest.raises(ValidationError) as info:
        parse_config_text("[simulation]\ndt_control = 0.01\ndt_physics = 3e-4\n")
    assert info.value.constraint == "dt_multiple"


def test_gamma_not_spd():
    with pytest.raises(ValidationError) as info:
        parse_config_text("[adaptation]\ngamma_x = 4000, 0; 0, -50\n")
    assert info.value.constraint == "spd"


def test_reference_model_not_hurwitz():
    with pytest.raises(ValidationError) as info:
        parse_config_text("[controller]\nA_m = 0, 1; 6, -4\n")
    assert info.value.constraint == "hurwitz"


def test_geometry_out_of_range():
    with pytest.raises(ValidationError) as info:
        parse_config_text("[geometry]\nbeta_offset = 0\n")
    assert info.value.constraint == "triangle_feasibility"


@pytest.mark.parametrize("text, line, key", [
    ("[plant]\nmass = 2\nbogus = 1\n", 3, "bogus"),
    ("[plants]\nmass = 2\n", 1, None),
    ("[plant]\n\nmass = heavy\n", 3, "plant.mass"),
    ("[adaptation]\ngamma_x = 1, 0; 0\n", 2, "adaptation.gamma_x"),
    ("[plant]\nmass = inf\n", 2, "plant.mass"),
    ("[output]\nplots = maybe\n", 2, "output.plots"),
])
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ParseError) as info:
        parse_config_text(text)
    assert info.value.line == line
    assert info.value.key == key


def test_syntax_error():
    with pytest.raises(ParseError):
        parse_config_text("mass = 2\n")
    with pytest.raises(ParseError):
        parse_config_text("[plant]\nmass = 2\nmass = 3\n")


def test_bad_choice():
    with pytest.raises(ValidationError):
        parse_config_text("[simulation]\nmode = fast\n")


def test_csv_reference_path_resolved(tmp_path):
    (tmp_path / "walk.csv").write_text("0,0\n1,0.2\n")
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text("[reference]\nkind = csv\npath = walk.csv\n")
    cfg = parse_config(cfg_path)
    assert cfg.reference(0.5) == pytest.approx(0.1)
    assert parse_config_text(format_config(cfg)) == cfg


def test_missing_reference_file(tmp_path):
    with pytest.raises(ValidationError):
        parse_config_text("[reference]\nkind = csv\npath = nowhere.csv\n", base_dir=tmp_path)


def test_echo_roundtrip_defaults():
    cfg = default_config()
    assert parse_config_text(format_config(cfg)) == cfg
    assert format_config(parse_config_text(format_config(cfg))) == format_config(cfg)


finite = st.floats(1e-3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(finite, st.floats(0.1, 10), st.floats(1, 1e5), st.floats(-0.3, 0.3), st.booleans(),
       st.floats(0.01, 1.0))
def test_echo_roundtrip_random(gr, k1, gx, x0, f2_without_zeta, tau):
    cfg = RunConfig()
    cfg = replace(cfg,
                  adaptation=replace(cfg.adaptation, gamma_r=gr, gamma_x=((gx, 0.0), (0.0, 50.0))),
                  backstepping=replace(cfg.backstepping, k1=k1, derivative_tau=tau),
                  simulation=replace(cfg.simulation, x1_0=x0),
                  controller=replace(cfg.controller, f2_without_zeta=f2_without_zeta))
    assert parse_config_text(format_config(cfg)) == cfg


def test_unreadable(tmp_path):
    with pytest.raises(ParseError):
        parse_config(tmp_path / "nope.ini")


def test_model_block_is_independent():
    cfg = parse_config_text("[controller]\nmodel_mass = 2.5\n")
    assert cfg.linkage().m == 2.0
    assert cfg.model_linkage().m == 2.5
