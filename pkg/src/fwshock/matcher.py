"""Patch point between the orbits ``P`` and ``Q``.

The profile jumps at ``xi = 0`` from a point of ``P`` to a point of ``Q``
which is its mirror image through ``(c, 0)``:

    U_left + U_right = 2c,   V_left + V_right = 0.

Two independent routes find it.  :func:`match_algebraic` works on the
``U`` axis alone, using that both orbits lie on known level sets of ``H``;
:func:`match_on_trajectories` intersects the integrated ``Q`` with the
reflection of the integrated ``P``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from fwshock.phase_plane import PlanarPoint, RegimeError, WaveParams, first_integral_H
from fwshock.shooting import Trajectory, dense_eval, locate_on_trajectory

__all__ = ["JumpData", "MatchError", "match_algebraic", "match_on_trajectories", "level_V2"]


class MatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class JumpData:
    U_left: float
    U_right: float
    V_left: float
    V_right: float
    b1: float | None
    b2: float | None
    method: str  # "algebraic" | "trajectory"

    def rh_defect(self, c: float) -> float:
        return abs(self.U_left + self.U_right - 2.0 * c)

    def derivative_defect(self) -> float:
        return abs(self.V_left + self.V_right)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> JumpData:
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def level_V2(p: WaveParams, level: float, U):
    """``V**2`` on the level set ``H = level`` as a function of ``U`` (``U != c``)."""
    c = p.c
    return (
        level / (U - c) ** 2
        + 0.25 * U * U
        - (3.0 * c - 4.0) * U / 6.0
        - p.alpha
        + 0.25 * c * c
        + c / 3.0
    )


def _mismatch(p: WaveParams, HQ: float, HP: float, U):
    return level_V2(p, HQ, U) - level_V2(p, HP, 2.0 * p.c - U)


def match_algebraic(p: WaveParams, n_scan: int = 1024) -> JumpData:
    """Solve ``V_Q(U)**2 = V_P(2c - U)**2`` for ``U`` in ``(B, c)``.

    ``g`` is scanned on ``n_scan`` points first; more than one sign change
    is reported rather than resolved.
    """
    if not p.shock_regime:
        raise RegimeError(f"shock regime B + 2 < c < A fails for {p}")
    HQ = first_integral_H(p, PlanarPoint(p.B, 0.0))
    HP = first_integral_H(p, PlanarPoint(p.A, 0.0))
    delta = 1.0e-6 * (p.c - p.B)
    u = np.linspace(p.B + delta, p.c - delta, n_scan)
    g = _mismatch(p, HQ, HP, u)
    keep = g != 0.0
    u, g = u[keep], g[keep]
    flips = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    if flips.size == 0:
        raise MatchError(f"no sign change of the level-set mismatch on ({p.B}, {p.c})")
    if flips.size > 1:
        raise MatchError(
            f"{flips.size} sign changes of the level-set mismatch near U = {u[flips]}; "
            "the intersection is expected to be unique"
        )

    k = int(flips[0])
    lo, hi = u[k], u[k + 1]
    glo = g[k]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = _mismatch(p, HQ, HP, mid)
        if gm == 0.0:
            lo = hi = mid
            break
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    U_right = 0.5 * (lo + hi)
    V2 = level_V2(p, HQ, U_right)
    if not V2 > 0.0:
        raise MatchError(f"matched point U = {U_right} has V**2 = {V2} <= 0")
    V_right = -math.sqrt(V2)
    return JumpData(
        U_left=2.0 * p.c - U_right,
        U_right=U_right,
        V_left=-V_right,
        V_right=V_right,
        b1=None,
        b2=None,
        method="algebraic",
    )


def match_on_trajectories(
    P: Trajectory, Q: Trajectory, hint: JumpData | None = None, tol: float = 1.0e-12
) -> JumpData:
    """Parameters ``b1`` on ``P`` and ``b2`` on ``Q`` of the mirror-image pair.

    Without ``hint`` this intersects ``Q`` with the reflection of ``P``
    (scalar bisection along ``Q``); with ``hint`` it only locates the hinted
    ``U`` values on each orbit.
    """
    p = P.params
    c = p.c
    Pu_lo, Pu_hi = float(P.U[0]), float(P.U[-1])

    if hint is not None:
        if not Pu_lo <= hint.U_left <= Pu_hi:
            raise MatchError(f"P covers U in [{Pu_lo}, {Pu_hi}]; raise U_stop past {hint.U_left}")
        if not Q.U[0] <= hint.U_right <= Q.U[-1]:
            raise MatchError(f"Q ends at U = {Q.U[-1]}; lower V_floor to reach {hint.U_right}")
        b1, Pp = locate_on_trajectory(P, lambda U, V: U - hint.U_left, tol)
        b2, Qp = locate_on_trajectory(Q, lambda U, V: U - hint.U_right, tol)
    else:
        def v_on_P(U_target: float) -> tuple[float, float]:
            z, pt = locate_on_trajectory(P, lambda U, V: U - U_target, tol)
            return z, pt.V

        # part of Q whose mirror image falls inside P's U range
        usable = (2.0 * c - Q.U >= Pu_lo) & (2.0 * c - Q.U <= Pu_hi)
        idx = np.nonzero(usable)[0]
        if idx.size < 2:
            raise MatchError("P and the reflected Q do not overlap; extend U_stop")

        def phi(zq: float) -> float:
            U2, V2 = Q.dense(zq)[0]
            return V2 + v_on_P(2.0 * c - U2)[1]

        zs = Q.z[idx]
        vals = np.array([Q.V[i] + v_on_P(2.0 * c - Q.U[i])[1] for i in idx])
        flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if flips.size == 0:
            raise MatchError(
                f"no intersection of Q with the reflected P; Q ends at V = {Q.V[-1]:.3g}, "
                "lower V_floor or raise U_stop"
            )
        if flips.size > 1:
            raise MatchError(f"{flips.size} intersections of Q with the reflected P")
        k = int(flips[0])
        lo, hi = float(zs[k]), float(zs[k + 1])
        s_lo = np.sign(vals[k])
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if np.sign(phi(mid)) == s_lo:
                lo = mid
            else:
                hi = mid
        b2 = 0.5 * (lo + hi)
        Qp = dense_eval(Q, b2)
        b1, _ = v_on_P(2.0 * c - Qp.U)
        Pp = dense_eval(P, b1)

    return JumpData(
        U_left=Pp.U,
        U_right=Qp.U,
        V_left=Pp.V,
        V_right=Qp.V,
        b1=b1,
        b2=b2,
        method="trajectory",
    )
