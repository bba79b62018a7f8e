import math
from dataclasses import replace
from types import SimpleNamespace

import pytest
from hypothesis import given, strategies as st

from seamrac.errors import DegenerateAngle, InfeasibleGeometry, ValidationError
from seamrac.geometry import (
    LinkageParams, angle_sines, check_operating_range, deflection_from_torque, eval_fast,
    geometry_eval, gravity_reaction_torque, lsea_length, reaction_force, torque_from_deflection,
)
from seamrac.validate import coordinate_geometry

P = LinkageParams()
# Lever aligned with beta = phi, as in the hand-substitution examples.
P0 = replace(P, beta_offset=0.0)

phis = st.floats(-0.6, 0.6, allow_nan=False)


def test_length_at_zero_by_substitution():
    # radicand 0.001225 + 0.013924 + 0.0016 - 0.00944 = 0.007309
    assert lsea_length(0.0, P0) == pytest.approx(math.sqrt(0.007309), rel=1e-12)
    assert lsea_length(0.0, P0) == pytest.approx(0.085493, abs=5e-7)


def test_zero_lever_gives_anchor_radius():
    p = SimpleNamespace(d4=0.035, d5=0.118, d6=0.0, beta_offset=0.0)
    for phi in (-1.0, 0.0, 0.7):
        assert lsea_length(phi, p) == pytest.approx(math.hypot(0.035, 0.118), rel=1e-15)


@pytest.mark.parametrize("params", [P0, P])
def test_length_and_sine_match_coordinates(params):
    for i in range(101):
        phi = -0.5 + 0.01 * i
        L_c, sd_c, G_c = coordinate_geometry(phi, params)
        assert lsea_length(phi, params) == pytest.approx(L_c, rel=1e-12, abs=0)
        if params is P:
            sd, _ = angle_sines(phi, params)
            assert sd == pytest.approx(sd_c, rel=1e-12)
            assert geometry_eval(phi, params).G == pytest.approx(G_c, rel=1e-12)


def test_sine_delta_at_zero_against_coordinates():
    sd, _ = angle_sines(0.0, P0)
    assert sd == pytest.approx(0.035 / math.sqrt(0.007309), rel=1e-12)
    assert sd == pytest.approx(coordinate_geometry(0.0, P0)[1], rel=1e-12)


def test_right_angle_case():
    # beta - atan2(d5, d4) + pi/2 = pi/2  ->  sin_delta = r / L
    p = replace(P, beta_offset=math.atan2(P.d5, P.d4))
    sd, _ = angle_sines(0.0, p)
    assert sd == pytest.approx(P.anchor_radius / lsea_length(0.0, p), rel=1e-14)


@given(phis)
def test_sine_consistency(phi):
    sd, sg = angle_sines(phi, P)
    assert sg * lsea_length(phi, P) / (P.d7 * sd) == pytest.approx(1.0, abs=1e-12)
    assert 0 < sd <= 1 and 0 < sg <= 1


def test_gravity_torque():
    assert gravity_reaction_torque(0.0, P) == 0.0
    assert gravity_reaction_torque(math.pi / 2, P) == pytest.approx(1.03005, rel=1e-12)


@given(st.floats(-3, 3))
def test_gravity_torque_odd(phi):
    assert gravity_reaction_torque(-phi, P) == -gravity_reaction_torque(phi, P)


def test_reaction_force_forms_agree():
    assert reaction_force(0.0, P) == 0.0
    for i in range(100):
        phi = -0.6 + 1.2 * i / 99
        L, sd, _ = coordinate_geometry(phi, P)
        other = P.m * P.g * P.d3 * math.sin(phi) * L / (P.d6 * P.d7 * sd)
        assert reaction_force(phi, P) == pytest.approx(other, rel=1e-12, abs=1e-15)


def test_transmission_negative_in_range():
    for i in range(121):
        assert geometry_eval(-0.6 + 0.01 * i, P).G < 0


@pytest.mark.parametrize("params", [P, replace(P, d6=0.03), replace(P, beta_offset=P.beta_offset + 0.2)])
def test_derivatives_match_finite_differences(params):
    for i in range(121):
        phi = -0.6 + 0.01 * i
        ev = geometry_eval(phi, params)
        fd1 = (coordinate_geometry(phi + 1e-5, params)[2]
               - coordinate_geometry(phi - 1e-5, params)[2]) / 2e-5
        G0 = coordinate_geometry(phi, params)[2]
        fd2 = (coordinate_geometry(phi + 1e-4, params)[2] - 2 * G0
               + coordinate_geometry(phi - 1e-4, params)[2]) / 1e-8
        assert abs(ev.dG_dphi - fd1) <= 1e-6 * abs(ev.dG_dphi)
        assert abs(ev.d2G_dphi2 - fd2) <= 1e-4 * abs(ev.d2G_dphi2)


@given(st.floats(-10, 10), phis)
def test_torque_deflection_inverse(tau, phi):
    back = torque_from_deflection(deflection_from_torque(tau, phi, P), phi, P)
    assert back == pytest.approx(tau, rel=1e-12, abs=1e-12)


def test_unit_deflection_torque():
    L, sd, _ = coordinate_geometry(0.0, P)
    assert torque_from_deflection(0.0, 0.0, P) == 0.0
    assert torque_from_deflection(1.0, 0.0, P) == pytest.approx(-P.k * P.d6 * P.d7 * sd / L, rel=1e-12)


def test_eval_fast_matches_public_functions():
    L, sd, sg, G, _, _ = eval_fast(0.3, P)
    assert L == lsea_length(0.3, P)
    assert (sd, sg) == pytest.approx(angle_sines(0.3, P), rel=1e-15)


def test_singular_configurations_raise():
    # lever folded onto the anchor: radicand (r - d6)^2 > 0 but sin_delta = 0
    p = replace(P, beta_offset=0.0)
    with pytest.raises(DegenerateAngle):
        angle_sines(-math.pi / 2 + math.atan2(P.d5, P.d4), p)
    # lever as long as the anchor radius, folded straight back: L = 0
    folded = replace(P, d6=P.anchor_radius, beta_offset=math.atan2(P.d5, P.d4))
    with pytest.raises(InfeasibleGeometry):
        lsea_length(-math.pi / 2, folded)


def test_operating_range_check():
    check_operating_range(P)
    with pytest.raises(ValidationError) as info:
        check_operating_range(P0)
    assert info.value.constraint == "triangle_feasibility"


def test_params_must_be_positive():
    with pytest.raises(ValidationError):
        LinkageParams(d6=0.0)
    with pytest.raises(ValidationError):
        LinkageParams(k=-1.0)
