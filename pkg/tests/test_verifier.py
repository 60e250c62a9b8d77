import json
import math

import numpy as np
import pytest

from fwshock.kernel import GridFunction
from fwshock.phase_plane import WaveParams
from fwshock.profile import Profile, constant_profile, peakon_profile, step_profile
from fwshock.verifier import (
    BUILTIN_BUMPS,
    BumpTest,
    ResidualReport,
    Tolerances,
    VerificationError,
    check_derivative_condition,
    check_rankine_hugoniot,
    evaluate_weak_traveling_form,
    full_report,
    residual_const,
    residual_second_order,
    residual_wode1,
    wode1_at,
)

from oracles import PEAKON_C, STEP_RESIDUAL_AT_1


def test_shock_jump_conditions(ref_profile, ref_params):
    assert check_rankine_hugoniot(ref_profile, ref_params.c) <= 1e-9
    assert check_derivative_condition(ref_profile) <= 1e-9


def test_shock_residuals(ref_profile, ref_params):
    assert residual_wode1(ref_profile, ref_params.c) <= 1e-4
    assert residual_const(ref_profile, ref_params) <= 1e-4
    assert residual_second_order(ref_profile, ref_params) <= 1e-6


def test_shock_weak_form(ref_profile, ref_params):
    for name in BUILTIN_BUMPS:
        assert abs(evaluate_weak_traveling_form(ref_profile, ref_params.c, name)) <= 1e-4


def test_wrong_speed_detected(ref_profile, ref_params):
    assert check_rankine_hugoniot(ref_profile, ref_params.c + 0.1) == pytest.approx(0.2)
    assert residual_wode1(ref_profile, ref_params.c + 0.1) > 1e-2


def test_artificial_derivative_jump():
    gf = step_profile(4.0, 0.0, L=5.0, n=101).grid
    ones = np.ones(101)
    pr = Profile(grid=gf, derivative_grid=GridFunction(-5.0, 5.0, ones, 1.0, 1.0, jump=(1.0, 1.0)))
    assert check_derivative_condition(pr) == 2.0


def test_missing_one_sided_derivatives():
    gf = step_profile(4.0, 0.0, L=5.0, n=101).grid
    pr = Profile(grid=gf, derivative_grid=GridFunction(-5.0, 5.0, np.zeros(101), 0.0, 0.0))
    with pytest.raises(VerificationError):
        check_derivative_condition(pr)


def test_step_profile_residual():
    st = step_profile(4.0, 0.0)
    r = wode1_at(st, 3.0, [1.0, -1.0])
    np.testing.assert_allclose(np.abs(r), STEP_RESIDUAL_AT_1, atol=1e-12)
    assert residual_wode1(st, 3.0) > 1.0
    assert check_rankine_hugoniot(st, 3.0) == pytest.approx(1.0 * 2)
    # rh-consistent speed still fails the interior equation
    assert check_rankine_hugoniot(st, 2.0) == 0.0
    assert residual_wode1(st, 2.0) > 0.5


def test_step_weak_form_nonzero():
    st = step_profile(4.0, 0.0)
    assert abs(evaluate_weak_traveling_form(st, 3.0, "jump-line")) > 1e-2


def test_peakon_residual():
    pk = peakon_profile()
    assert residual_wode1(pk, PEAKON_C) <= 1e-6
    p = WaveParams.continuous(0.0, PEAKON_C)
    assert residual_const(pk, p) <= 1e-6
    assert check_rankine_hugoniot(pk, PEAKON_C) == 0.0


def test_peakon_weak_form():
    pk = peakon_profile()
    for name in ("jump-line", "left", "right"):
        assert abs(evaluate_weak_traveling_form(pk, PEAKON_C, name)) <= 1e-6


def test_constant_profile_zero_residuals():
    k, c = 1.5, 1.0
    pr = constant_profile(k)
    p = WaveParams.continuous(k, c)
    rep = full_report(pr, p)
    assert rep.passes()
    assert rep.rh_residual == 0.0 and rep.wode1_sup < 1e-12
    assert any("no jump" in f for f in rep.flags)


def test_zero_test_function(ref_profile, ref_params):
    assert evaluate_weak_traveling_form(ref_profile, ref_params.c, "zero") == 0.0


def test_bump_support_and_jump_line_term():
    b = BUILTIN_BUMPS["jump-line"]
    assert b.phi(3.0, 3.0 * b.t0, b.t0) == 1.0
    assert b.phi(3.0, 3.0 * b.t0 + 1.01, b.t0) == 0.0
    assert b.phi(3.0, 0.0, b.t0 + b.st + 0.01) == 0.0
    # the functional is linear in the test function
    st = step_profile(4.0, 0.0, L=20.0, n=2001)
    b2 = BumpTest(b.xi0, b.t0, b.sx, b.st, amplitude=2.0)
    v1 = evaluate_weak_traveling_form(st, 3.0, b)
    v2 = evaluate_weak_traveling_form(st, 3.0, b2)
    assert v2 == pytest.approx(2.0 * v1, rel=1e-12)


def test_weak_form_burgers_step_at_rh_speed():
    # at the mean speed the jump term vanishes and W' = 0, leaving K' * W = -2 e^{-|xi|}
    st = step_profile(4.0, 0.0, L=20.0, n=2001)
    val = evaluate_weak_traveling_form(st, 2.0, "left")
    gx, wx = np.polynomial.legendre.leggauss(40)
    b = BUILTIN_BUMPS["left"]
    # brute-force double integral of phi(xi + 2t, t) * (-2 e^{-|xi|}) over t in [0.5, 1.5]
    t = 1.0 + 0.5 * gx
    total = 0.0
    for seg in ((-6.0, -4.0), (-4.0, -2.0), (-2.0, 0.0), (0.0, 2.0)):
        xi = 0.5 * (seg[0] + seg[1]) + 0.5 * (seg[1] - seg[0]) * gx
        X, Tt = np.meshgrid(xi, t, indexing="ij")
        f = b.phi(2.0, X + 2.0 * Tt, Tt) * (-2.0 * np.exp(-np.abs(X)))
        total += 0.5 * (seg[1] - seg[0]) * 0.5 * np.einsum("i,j,ij->", wx, wx, f)
    assert val == pytest.approx(total, abs=1e-6)


def test_budget_guard(ref_profile, ref_params):
    with pytest.raises(VerificationError):
        evaluate_weak_traveling_form(ref_profile, ref_params.c, "jump-line", budget=100)


def test_grid_only_input(ref_profile, ref_params):
    rep = full_report(ref_profile.grid, ref_params)
    assert rep.rh_residual <= 1e-9
    assert rep.wode1_sup <= 1e-4 and rep.const_sup <= 1e-4


def test_xi_min_validation(ref_profile):
    with pytest.raises(ValueError):
        residual_wode1(ref_profile, 3.0, xi_min=0.0)


def test_report_json(ref_profile, ref_params):
    rep = full_report(ref_profile, ref_params)
    assert isinstance(rep, ResidualReport)
    data = json.loads(rep.to_json())
    assert data["failures"] == []
    assert data["quadrature"]["panel_order"] == 4
    assert data["grid"]["n"] == 4001
    assert len(data["config_hash"]) == 16
    assert {d["xi"] for d in data["wode1_probes"]} == {-1.0, 1.0}
    strict = Tolerances(wode1=1e-12)
    assert "wode1_sup" in rep.failures(strict)
    assert full_report(ref_profile, ref_params).config_hash == rep.config_hash


def test_report_flags_step():
    st = step_profile(4.0, 0.0)
    p = WaveParams(A=4.0, B=0.0, c=3.0, alpha=4.5)
    rep = full_report(st, p)
    fails = rep.failures()
    assert "wode1_sup" in fails and "rh_residual" in fails
    probe = dict(rep.wode1_probes)[1.0]
    assert abs(probe) == pytest.approx(STEP_RESIDUAL_AT_1, abs=1e-6)
    assert math.isfinite(rep.const_sup)
