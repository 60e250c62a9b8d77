import math

import numpy as np
import pytest

from fwshock._ode import StepSizeUnderflow, dopri54, hermite, hermite_integral, hermite_slope


def test_exponential_growth():
    sol = dopri54(lambda t, y: y, 0.0, np.array([1.0]), 2.0, rtol=1e-12, atol=1e-14)
    assert sol.status == "t_end"
    assert sol.t[-1] == 2.0
    assert sol.y[-1, 0] == pytest.approx(math.exp(2.0), rel=1e-10)
    np.testing.assert_allclose(sol.f[:, 0], sol.y[:, 0])


def test_terminal_event_is_exact():
    # harmonic oscillator, stop where the first component first drops to 0.5
    f = lambda t, y: np.array([y[1], -y[0]])
    sol = dopri54(f, 0.0, np.array([1.0, 0.0]), 10.0, rtol=1e-12, atol=1e-14,
                  events=[("half", lambda y: 0.5 - y[0])])
    assert sol.status == "event:half"
    assert sol.t[-1] == pytest.approx(math.acos(0.5), abs=1e-10)
    assert sol.y[-1, 0] == pytest.approx(0.5, abs=1e-10)


def test_first_of_two_events_wins():
    f = lambda t, y: np.array([1.0])
    sol = dopri54(f, 0.0, np.array([0.0]), 10.0, max_step=0.7,
                  events=[("late", lambda y: y[0] - 3.0), ("early", lambda y: y[0] - 2.0)])
    assert sol.status == "event:early"
    assert sol.t[-1] == pytest.approx(2.0, abs=1e-12)


def test_event_already_triggered_at_start():
    sol = dopri54(lambda t, y: y, 0.0, np.array([1.0]), 1.0, events=[("pos", lambda y: y[0])])
    assert sol.status == "event:pos" and sol.t.size == 1


def test_dense_output_order():
    f = lambda t, y: np.array([y[1], -y[0]])
    sol = dopri54(f, 0.0, np.array([0.0, 1.0]), 3.0, rtol=1e-12, atol=1e-14, max_step=0.05)
    k = sol.t.size // 2
    h = sol.t[k + 1] - sol.t[k]
    for tau in (0.25, 0.5, 0.8):
        y = hermite(sol.y[k], sol.f[k], sol.y[k + 1], sol.f[k + 1], h, tau)
        assert y[0] == pytest.approx(math.sin(sol.t[k] + tau * h), abs=1e-8)
        dy = hermite_slope(sol.y[k], sol.f[k], sol.y[k + 1], sol.f[k + 1], h, tau)
        assert dy[0] == pytest.approx(math.cos(sol.t[k] + tau * h), abs=1e-6)


def test_hermite_integral_exact_for_cubics():
    p = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.7])
    dp, ip = p.deriv(), p.integ()
    a, h = 0.4, 1.3
    for tau in (0.0, 0.3, 1.0):
        val = hermite_integral(p(a), dp(a), p(a + h), dp(a + h), h, tau)
        assert val == pytest.approx(ip(a + tau * h) - ip(a), abs=1e-13)


def test_step_size_underflow():
    # finite-time blow-up at t = 1
    with pytest.raises(StepSizeUnderflow) as exc:
        dopri54(lambda t, y: y * y, 0.0, np.array([1.0]), 2.0, min_step=1e-6)
    assert exc.value.t < 1.0
