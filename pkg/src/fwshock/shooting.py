"""Orbits leaving the two saddles along their unstable manifolds.

``P`` leaves ``S_+ = (A, 0)`` into ``{U > A, V > 0}`` and ``Q`` leaves
``S_- = (B, 0)`` into ``{B < U < c, V < 0}``.  Both start at a first-order
offset ``epsilon`` along the unit unstable eigenvector (launch at ``z = 0``)
and are integrated with a Dormand-Prince pair.  Nodes carry their slopes so
the orbit can be evaluated anywhere by cubic Hermite interpolation.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from fwshock._ode import StepSizeUnderflow, dopri54, hermite, hermite_slope
from fwshock.phase_plane import (
    H_array,
    PlanarPoint,
    RegimeError,
    WaveParams,
    first_integral_H,
    saddle_data,
)

__all__ = [
    "HDriftError",
    "ShootingConfig",
    "ShootingError",
    "Trajectory",
    "dense_eval",
    "locate_on_trajectory",
    "shoot_P",
    "shoot_Q",
]


class ShootingError(RuntimeError):
    """Integration failed; ``last_state`` holds the last good ``(z, U, V)``."""

    def __init__(self, msg: str, last_state: tuple[float, float, float] | None = None):
        super().__init__(msg)
        self.last_state = last_state


class HDriftError(ShootingError):
    pass


@dataclass(frozen=True)
class ShootingConfig:
    """Integration settings for :func:`shoot_P` and :func:`shoot_Q`.

    ``epsilon=None`` means ``1e-7 * max(1, |A|, |B|)``.  ``U_stop=None``
    means ``2c - B + 1``, beyond any admissible matching point on ``P``.
    """

    epsilon: float | None = None
    rel_tol: float = 1.0e-11
    abs_tol: float = 1.0e-13
    max_step: float = 0.02
    U_stop: float | None = None
    V_floor: float = -50.0
    u_guard: float = 1.0e-6
    H_drift_tol: float = 1.0e-8
    z_max: float = 1000.0

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "max_step", "u_guard", "H_drift_tol", "z_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.V_floor < 0:
            raise ValueError("V_floor must be negative")

    def epsilon_for(self, p: WaveParams) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 1.0e-7 * max(1.0, abs(p.A), abs(p.B))

    def U_stop_for(self, p: WaveParams) -> float:
        if self.U_stop is not None:
            return self.U_stop
        return 2.0 * p.c - p.B + 1.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class Trajectory:
    params: WaveParams
    z: np.ndarray
    points: np.ndarray  # (N, 2) columns U, V
    derivatives: np.ndarray  # (N, 2) vector field at the nodes
    launch: str  # "S-" or "S+"
    epsilon: float
    termination: str
    H_launch: float

    @property
    def U(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def V(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def span(self) -> tuple[float, float]:
        return float(self.z[0]), float(self.z[-1])

    def H_drift(self) -> float:
        H = H_array(self.params, self.U, self.V)
        return float(np.max(np.abs(H - self.H_launch)) / abs(self.H_launch))

    def _bracket(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        z0, z1 = self.span
        if np.any(z < z0) or np.any(z > z1):
            raise ValueError(f"z outside the trajectory span [{z0}, {z1}]")
        k = np.clip(np.searchsorted(self.z, z, side="right") - 1, 0, self.z.size - 2)
        h = self.z[k + 1] - self.z[k]
        return k, h, (z - self.z[k]) / h

    def dense(self, z) -> np.ndarray:
        """Hermite-interpolated ``(U, V)`` rows at the parameters ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        k, h, tau = self._bracket(z)
        P, D = self.points, self.derivatives
        return hermite(P[k], D[k], P[k + 1], D[k + 1], h[:, None], tau[:, None])

    def dense_slope(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        k, h, tau = self._bracket(z)
        P, D = self.points, self.derivatives
        return hermite_slope(P[k], D[k], P[k + 1], D[k + 1], h[:, None], tau[:, None])

    # {{{ serialization

    def manifest(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "launch": self.launch,
            "epsilon": self.epsilon,
            "termination": self.termination,
            "H_launch": self.H_launch,
            "H_drift": self.H_drift(),
            "nodes": int(self.z.size),
            "z_span": list(self.span),
        }

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w") as fh:
            fh.write("z,U,V,dU,dV\n")
            for z, (U, V), (dU, dV) in zip(self.z, self.points, self.derivatives):
                fh.write(",".join(map(repr, map(float, (z, U, V, dU, dV)))) + "\n")
        path.with_suffix(".json").write_text(json.dumps(self.manifest(), indent=2) + "\n")
        return path

    # }}}


def _field(p: WaveParams) -> Callable[[float, np.ndarray], np.ndarray]:
    c, k0 = p.c, 0.5 * p.c * p.c - p.alpha

    def f(_z, y):
        U, V = y
        return np.array([(U - c) * V, -V * V + 0.5 * U * U + (1.0 - c) * U + k0])

    return f


def _shoot(p, cfg, start, direction, events, label, target_event) -> Trajectory:
    eps = cfg.epsilon_for(p)
    y0 = np.asarray(start) + eps * direction
    f = _field(p)

    # first-order launch: the field at y0 must match the linearisation
    scale = max(1.0, abs(p.A), abs(p.B))
    lin = np.linalg.norm(f(0.0, y0) - _jac_at(p, start) @ (y0 - start))
    if lin > cfg.rel_tol * scale:
        raise ShootingError(
            f"epsilon={eps:g} too large: linearisation residual {lin:.2e} at launch"
        )

    try:
        sol = dopri54(
            f, 0.0, y0, cfg.z_max,
            rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step, events=events,
        )
    except StepSizeUnderflow as exc:
        raise ShootingError(
            f"{label}: step-size underflow", (exc.t, float(exc.y[0]), float(exc.y[1]))
        ) from exc

    traj = Trajectory(
        params=p,
        z=sol.t,
        points=sol.y,
        derivatives=sol.f,
        launch=label,
        epsilon=eps,
        termination=sol.status,
        H_launch=first_integral_H(p, PlanarPoint(*y0)),
    )
    last = (float(sol.t[-1]), float(sol.y[-1, 0]), float(sol.y[-1, 1]))
    if not sol.status.startswith("event:") or (
        target_event is not None and sol.status != f"event:{target_event}"
    ):
        raise ShootingError(f"{label}: stopped with {sol.status} before reaching its target", last)
    drift = traj.H_drift()
    if drift > cfg.H_drift_tol:
        raise HDriftError(f"{label}: H drift {drift:.2e} exceeds {cfg.H_drift_tol:.1e}", last)
    return traj


def _jac_at(p: WaveParams, x) -> np.ndarray:
    U, V = x
    return np.array([[V, U - p.c], [U + 1.0 - p.c, -2.0 * V]])


def shoot_P(p: WaveParams, cfg: ShootingConfig | None = None) -> Trajectory:
    """Orbit from ``S_+ = (A, 0)`` up and to the right, stopped at ``U = U_stop``."""
    cfg = cfg or ShootingConfig()
    if not p.shock_regime:
        raise RegimeError(f"shock regime B + 2 < c < A fails for {p}")
    _, sp = saddle_data(p)
    direction = sp.unstable_direction
    if direction[0] < 0:
        direction = -direction
    U_stop = cfg.U_stop_for(p)
    events = [("U_stop", lambda y: y[0] - U_stop)]
    return _shoot(p, cfg, (p.A, 0.0), direction, events, "S+", "U_stop")


def shoot_Q(p: WaveParams, cfg: ShootingConfig | None = None) -> Trajectory:
    """Orbit from ``S_- = (B, 0)`` down and to the right, stopped near its blow-up.

    The orbit reaches ``V = -inf`` at finite ``z`` while ``U -> c``; it is
    cut at ``V = V_floor`` or ``U = c - u_guard``, whichever comes first.
    """
    cfg = cfg or ShootingConfig()
    if not p.shock_regime:
        raise RegimeError(f"shock regime B + 2 < c < A fails for {p}")
    sm, _ = saddle_data(p)
    direction = sm.unstable_direction
    if direction[0] < 0:
        direction = -direction
    V_floor, U_cap = cfg.V_floor, p.c - cfg.u_guard
    events = [
        ("V_floor", lambda y: V_floor - y[1]),
        ("U_guard", lambda y: y[0] - U_cap),
    ]
    return _shoot(p, cfg, (p.B, 0.0), direction, events, "S-", None)


def dense_eval(t: Trajectory, z: float) -> PlanarPoint:
    U, V = t.dense(z)[0]
    return PlanarPoint(float(U), float(V))


def locate_on_trajectory(
    t: Trajectory, predicate: Callable[[float, float], float], tol: float = 1.0e-12
) -> tuple[float, PlanarPoint]:
    """First parameter where ``predicate(U, V)`` changes sign, by bisection in ``z``."""
    g = np.array([predicate(U, V) for U, V in t.points])
    if g[0] == 0.0:
        return float(t.z[0]), PlanarPoint(*map(float, t.points[0]))
    flips = np.nonzero(np.sign(g[1:]) != np.sign(g[0]))[0]
    if flips.size == 0:
        raise ValueError("predicate does not change sign along the trajectory")
    k = int(flips[0])
    lo, hi = float(t.z[k]), float(t.z[k + 1])
    s0 = np.sign(g[0])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        U, V = t.dense(mid)[0]
        if np.sign(predicate(U, V)) == s0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    return z, dense_eval(t, z)


def with_epsilon(cfg: ShootingConfig, epsilon: float) -> ShootingConfig:
    return replace(cfg, epsilon=epsilon)
