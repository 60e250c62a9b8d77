"""Dormand-Prince 5(4) integrator with PI step control and terminal events.

Small and explicit on purpose: the shooting code needs every accepted node
together with its slope (for cubic Hermite dense output) and exact stopping
at terminal events.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

# Butcher tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_BETA1 = 0.7 / 5
_BETA2 = 0.4 / 5


class StepSizeUnderflow(RuntimeError):
    def __init__(self, msg: str, t: float, y: np.ndarray):
        super().__init__(msg)
        self.t = t
        self.y = y


@dataclass(frozen=True, eq=False)
class OdeSolution:
    t: np.ndarray
    y: np.ndarray  # (N, d)
    f: np.ndarray  # (N, d), slopes at the nodes
    status: str  # "event:<name>" or "t_end"


Event = tuple[str, Callable[[np.ndarray], float]]


# {{{ cubic Hermite helpers


def hermite(y0, f0, y1, f1, h, tau):
    """Cubic Hermite value at fraction ``tau`` of an interval of length ``h``."""
    t2 = tau * tau
    t3 = t2 * tau
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + tau) * h * f0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * f1
    )


def hermite_slope(y0, f0, y1, f1, h, tau):
    t2 = tau * tau
    return (
        (6 * t2 - 6 * tau) * (y0 - y1) / h
        + (3 * t2 - 4 * tau + 1) * f0
        + (3 * t2 - 2 * tau) * f1
    )


def hermite_integral(y0, f0, y1, f1, h, tau):
    """Integral of the Hermite cubic from the left end to fraction ``tau``."""
    t2 = tau * tau
    t3 = t2 * tau
    t4 = t3 * tau
    return h * (
        (0.5 * t4 - t3 + tau) * y0
        + (0.25 * t4 - 2 * t3 / 3 + 0.5 * t2) * h * f0
        + (-0.5 * t4 + t3) * y1
        + (0.25 * t4 - t3 / 3) * h * f1
    )


# }}}


def _rk_step(fun, t, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        dy = sum(a * ki for a, ki in zip(_A[i], k))
        k.append(fun(t + _C[i] * h, y + h * dy))
    K = np.array(k)
    y_new = y + h * (_B @ K)
    err = h * (_E @ K)
    return y_new, K[-1], err


def dopri54(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    *,
    rtol: float = 1.0e-10,
    atol: float = 1.0e-12,
    max_step: float = math.inf,
    first_step: float | None = None,
    min_step: float = 1.0e-14,
    events: Sequence[Event] = (),
) -> OdeSolution:
    """Integrate ``y' = fun(t, y)`` forward from ``t0`` towards ``t_end``.

    Integration stops at ``t_end`` or at the first terminal event.  An event
    ``(name, g)`` fires where ``g(y)`` crosses from negative to nonnegative;
    the crossing is located on the Hermite interpolant and a final RK step
    lands on it exactly.
    """
    y = np.array(y0, dtype=np.float64)
    t = float(t0)
    f = np.asarray(fun(t, y), dtype=np.float64)
    ts, ys, fs = [t], [y], [f]

    gvals = [g(y) for _, g in events]
    for (name, _), gv in zip(events, gvals):
        if gv >= 0.0:
            return OdeSolution(np.array(ts), np.array(ys), np.array(fs), f"event:{name}")

    h = first_step
    if h is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((f / scale) ** 2))
        h = 1.0e-6 if d0 < 1.0e-5 or d1 < 1.0e-5 else 0.01 * d0 / d1
    h = min(h, max_step, t_end - t)
    err_prev = 1.0e-4

    while t < t_end:
        if h < min_step:
            raise StepSizeUnderflow(f"step size {h:.3e} below floor at t = {t:.6g}", t, y)
        y_new, f_new, err_vec = _rk_step(fun, t, y, f, h)
        if np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new)):
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        else:
            err = math.inf

        if err > 1.0:
            fac = 0.2 if not math.isfinite(err) else max(0.2, _SAFETY * err ** (-0.2))
            h *= fac
            continue

        # accepted step; check terminal events before committing
        g_new = [g(y_new) for _, g in events]
        hit = [i for i, (go, gn) in enumerate(zip(gvals, g_new)) if go < 0.0 <= gn]
        if hit:
            tau_star, which = 1.0, hit[0]
            for i in hit:
                g = events[i][1]
                lo, hi = 0.0, 1.0
                for _ in range(64):
                    mid = 0.5 * (lo + hi)
                    if g(hermite(y, f, y_new, f_new, h, mid)) >= 0.0:
                        hi = mid
                    else:
                        lo = mid
                if hi < tau_star:
                    tau_star, which = hi, i
            hs = tau_star * h
            y_ev, f_ev, _ = _rk_step(fun, t, y, f, hs)
            ts.append(t + hs)
            ys.append(y_ev)
            fs.append(f_ev)
            return OdeSolution(
                np.array(ts), np.array(ys), np.array(fs), f"event:{events[which][0]}"
            )

        t += h
        y, f, gvals = y_new, f_new, g_new
        ts.append(t)
        ys.append(y)
        fs.append(f)

        err = max(err, 1.0e-10)
        fac = _SAFETY * err ** (-_BETA1) * err_prev ** _BETA2
        err_prev = err
        h = min(h * min(5.0, max(0.2, fac)), max_step, t_end - t)
        if t_end - t <= 1.0e-14 * max(1.0, abs(t_end)):
            break

    return OdeSolution(np.array(ts), np.array(ys), np.array(fs), "t_end")
