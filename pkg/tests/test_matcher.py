import numpy as np
import pytest

from fwshock.matcher import JumpData, MatchError, level_V2, match_algebraic, match_on_trajectories
from fwshock.phase_plane import RegimeError, make_params
from fwshock.shooting import ShootingConfig, shoot_P, shoot_Q

from oracles import REF_U_LEFT, REF_U_RIGHT, REF_V_ABS


def test_algebraic_reference(ref_jump_algebraic, ref_params):
    j = ref_jump_algebraic
    assert j.U_right == pytest.approx(REF_U_RIGHT, abs=1e-12)
    assert j.U_left == pytest.approx(REF_U_LEFT, abs=1e-12)
    assert j.V_left == pytest.approx(REF_V_ABS, abs=1e-10)
    assert j.V_right == pytest.approx(-REF_V_ABS, abs=1e-10)
    assert j.rh_defect(ref_params.c) <= 1e-12
    assert j.derivative_defect() == 0.0
    assert j.method == "algebraic" and j.b1 is None


def test_trajectory_matches_algebraic(ref_jump, ref_jump_algebraic):
    for k in ("U_left", "U_right", "V_left", "V_right"):
        assert getattr(ref_jump, k) == pytest.approx(getattr(ref_jump_algebraic, k), abs=1e-6)
    assert ref_jump.method == "trajectory"
    assert ref_jump.b1 > 0 and ref_jump.b2 > 0


def test_trajectory_with_hint(ref_orbits, ref_jump_algebraic):
    j = match_on_trajectories(*ref_orbits, hint=ref_jump_algebraic)
    assert j.U_left == pytest.approx(REF_U_LEFT, abs=1e-10)
    assert j.V_right == pytest.approx(-REF_V_ABS, abs=1e-8)


@pytest.mark.parametrize("A,B", [(2.5, 0.0), (3.0, 0.0), (6.0, 0.0), (5.0, -1.5)])
def test_match_sweep(A, B):
    p = make_params(A, B)
    alg = match_algebraic(p)
    traj = match_on_trajectories(shoot_P(p), shoot_Q(p))
    assert B < alg.U_right < p.c < alg.U_left
    assert alg.rh_defect(p.c) < 1e-12
    assert abs(traj.U_right - alg.U_right) < 1e-6
    assert abs(traj.V_right - alg.V_right) < 1e-6
    assert traj.derivative_defect() < 1e-9


def test_level_V2_on_orbit(ref_orbits, ref_params):
    _, Q = ref_orbits
    k = Q.z.size // 2
    V2 = level_V2(ref_params, Q.H_launch, Q.U[k])
    assert V2 == pytest.approx(Q.V[k] ** 2, rel=1e-8)


def test_no_overlap_reported(ref_params):
    P = shoot_P(ref_params, ShootingConfig(U_stop=4.5))
    Q = shoot_Q(ref_params)
    with pytest.raises(MatchError):
        match_on_trajectories(P, Q)


def test_short_Q_reported(ref_params, ref_jump_algebraic):
    P = shoot_P(ref_params)
    Q = shoot_Q(ref_params, ShootingConfig(V_floor=-0.5))
    with pytest.raises(MatchError):
        match_on_trajectories(P, Q)
    with pytest.raises(MatchError):
        match_on_trajectories(P, Q, hint=ref_jump_algebraic)


def test_regime_rejected():
    with pytest.raises(RegimeError):
        match_algebraic(make_params(2.0, 0.0))


def test_jump_json_roundtrip(ref_jump):
    back = JumpData.from_dict(ref_jump.to_dict())
    assert back == ref_jump
    assert '"method": "trajectory"' in ref_jump.to_json()
