"""Traveling-wave profiles on a uniform xi grid.

The shock profile is assembled from the two matched orbits.  The left piece
(``xi < 0``, ``W > c``) comes from ``P`` and the right piece (``xi > 0``,
``W < c``) from ``Q``, through ``xi = h(z) = int_b^z (U(r) - c) dr`` anchored
at the matched parameter ``b``, so ``h`` increases along ``P`` and decreases
along ``Q``.  The part of each piece beyond the launch point follows the
linearised saddle approach, an exponential in ``xi``.

:func:`integrate_profile_direct` is an independent route: it integrates the
second-order profile equation in ``xi`` outward from the jump data.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fwshock._ode import dopri54, hermite, hermite_integral
from fwshock.kernel import GridFunction
from fwshock.matcher import JumpData
from fwshock.phase_plane import RegimeError, WaveParams, saddle_data
from fwshock.shooting import Trajectory

__all__ = [
    "PEAKON_SPEED",
    "Profile",
    "ProfileError",
    "ShockProfile",
    "constant_profile",
    "integrate_profile_direct",
    "load_profile",
    "peakon_profile",
    "reconstruct_profile",
    "save_profile",
    "step_profile",
]

PEAKON_SPEED = 4.0 / 3.0


class ProfileError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False, kw_only=True)
class Profile:
    """Samples of ``W`` and ``W'`` (and optionally ``W''``) on one grid."""

    grid: GridFunction
    derivative_grid: GridFunction
    second_derivative_grid: GridFunction | None = None
    c: float | None = None

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def has_jump(self) -> bool:
        return self.grid.jump is not None


@dataclass(frozen=True, eq=False, kw_only=True)
class ShockProfile(Profile):
    params: WaveParams
    jump: JumpData
    L: float
    n: int
    method: str

    @property
    def tail_errors(self) -> dict:
        W, Wp = self.grid.samples, self.derivative_grid.samples
        return {
            "left": abs(W[0] - self.params.A),
            "right": abs(W[-1] - self.params.B),
            "left_slope": abs(Wp[0]),
            "right_slope": abs(Wp[-1]),
        }


def _second_derivative(p: WaveParams, W, Wp):
    # W'' from the profile ODE, valid off W = c
    return (0.5 * (W - p.c) ** 2 - Wp * Wp + W - p.alpha) / (W - p.c)


def _assemble(p, jump, xi, W, Wp, L, n, method) -> ShockProfile:
    zero = np.abs(xi) <= 1.0e-12 * L
    Wpp_jump = tuple(
        float(_second_derivative(p, u, v))
        for u, v in ((jump.U_left, jump.V_left), (jump.U_right, jump.V_right))
    )
    # the node at xi = 0, if any, carries jump means; one-sided values live in `jump`
    W = np.where(zero, p.c, W)
    Wp = np.where(zero, 0.5 * (jump.V_left + jump.V_right), Wp)
    Wpp = np.full_like(W, 0.5 * sum(Wpp_jump))
    Wpp[~zero] = _second_derivative(p, W[~zero], Wp[~zero])

    def gf(samples, tails, jmp):
        return GridFunction(-L, L, samples, tails[0], tails[1], jump=jmp)

    return ShockProfile(
        grid=gf(W, (p.A, p.B), (jump.U_left, jump.U_right)),
        derivative_grid=gf(Wp, (0.0, 0.0), (jump.V_left, jump.V_right)),
        second_derivative_grid=gf(Wpp, (0.0, 0.0), Wpp_jump),
        c=p.c,
        params=p,
        jump=jump,
        L=float(L),
        n=int(n),
        method=method,
    )


# {{{ reconstruction from the orbits


def _invert_h(t: Trajectory, b: float, targets: np.ndarray):
    """``(U, V)`` at the orbit parameters ``z <= b`` where ``h(z)`` equals ``targets``.

    Returns the samples and ``h(0)``, the image of the launch point.
    """
    c = t.params.c
    z0, z1 = t.span
    if not z0 < b <= z1:
        raise ProfileError(f"matched parameter {b} outside the orbit span [{z0}, {z1}]")

    kb = int(np.searchsorted(t.z, b, side="left"))
    zs = np.append(t.z[:kb], b)
    Ps = np.vstack([t.points[:kb], t.dense(b)])
    Ds = np.vstack([t.derivatives[:kb], t.dense_slope(b)])
    hz = np.diff(zs)

    U0, U1 = Ps[:-1, 0], Ps[1:, 0]
    dU0, dU1 = Ds[:-1, 0], Ds[1:, 0]
    seg = hermite_integral(U0, dU0, U1, dU1, hz, 1.0) - c * hz
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    hv = cum - cum[-1]

    sign = 1.0 if np.all(seg > 0) else -1.0 if np.all(seg < 0) else 0.0
    if sign == 0.0:
        raise ProfileError("h is not monotone: the orbit crosses U = c")

    # search on the increasing sequence sign*h
    j = np.searchsorted(sign * hv, sign * targets, side="right") - 1
    j = np.clip(j, 0, hz.size - 1)
    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = hv[j] + hermite_integral(U0[j], dU0[j], U1[j], dU1[j], hz[j], mid) - c * hz[j] * mid
        below = sign * (val - targets) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    tau = 0.5 * (lo + hi)
    pts = hermite(Ps[j], Ds[j], Ps[j + 1], Ds[j + 1], hz[j, None], tau[:, None])
    return pts, float(hv[0])


def reconstruct_profile(
    P: Trajectory, Q: Trajectory, jump: JumpData, L: float = 40.0, n: int = 4001
) -> ShockProfile:
    """Sample ``W`` and ``W'`` on ``[-L, L]`` from the matched orbits."""
    if jump.b1 is None or jump.b2 is None:
        raise ProfileError("jump data lacks orbit parameters; use match_on_trajectories")
    p = P.params
    sm, sp = saddle_data(p)
    xi = np.linspace(-L, L, n)
    W = np.empty(n)
    Wp = np.empty(n)

    left = xi < 0.0
    pts, h0 = _invert_h(P, jump.b1, xi[left])
    # beyond the launch point: W - A decays like exp(kappa xi)
    kappa = sp.eigenvalue_pos / (p.A - p.c)
    tail = xi[left] < h0
    U_launch = P.U[0]
    Wl = np.where(tail, p.A + (U_launch - p.A) * np.exp(kappa * (xi[left] - h0)), pts[:, 0])
    Vl = np.where(tail, kappa * (Wl - p.A), pts[:, 1])
    W[left], Wp[left] = Wl, Vl

    right = xi > 0.0
    pts, h0 = _invert_h(Q, jump.b2, xi[right])
    kappa = sm.eigenvalue_pos / (p.c - p.B)
    tail = xi[right] > h0
    U_launch = Q.U[0]
    Wr = np.where(tail, p.B + (U_launch - p.B) * np.exp(-kappa * (xi[right] - h0)), pts[:, 0])
    Vr = np.where(tail, -kappa * (Wr - p.B), pts[:, 1])
    W[right], Wp[right] = Wr, Vr

    return _assemble(p, jump, xi, W, Wp, L, n, "orbit")


# }}}


# {{{ direct integration in xi


def integrate_profile_direct(
    p: WaveParams,
    jump: JumpData,
    L: float = 40.0,
    n: int = 4001,
    *,
    rtol: float = 1.0e-12,
    atol: float = 1.0e-14,
    max_step: float = 0.02,
    tail_switch: float = 1.0e-4,
    c_guard: float = 1.0e-8,
) -> ShockProfile:
    """Integrate ``W'' = ((W - c)**2/2 - W'**2 + W - alpha)/(W - c)`` from ``xi = 0``.

    Each side is integrated away from the jump until ``W`` is within
    ``tail_switch`` of its asymptote; from there on the linearised
    exponential approach takes over, since integrating into a saddle
    amplifies round-off along its other eigendirection.
    """
    if not p.shock_regime:
        raise RegimeError(f"shock regime B + 2 < c < A fails for {p}")
    sm, sp = saddle_data(p)
    xi = np.linspace(-L, L, n)
    W = np.empty(n)
    Wp = np.empty(n)
    c, alpha = p.c, p.alpha
    switch = tail_switch * max(1.0, p.A - p.B)

    def rhs(direction):
        def f(_s, y):
            w, v = y
            if abs(w - c) < c_guard:
                raise ProfileError(f"|W - c| = {abs(w - c):.2e} below the division guard")
            return direction * np.array([v, (0.5 * (w - c) ** 2 - v * v + w - alpha) / (w - c)])

        return f

    for side, sel, (u0, v0), asym, rate in (
        (-1.0, xi < 0.0, (jump.U_left, jump.V_left), p.A, sp.eigenvalue_pos / (p.A - p.c)),
        (1.0, xi > 0.0, (jump.U_right, jump.V_right), p.B, sm.eigenvalue_pos / (p.c - p.B)),
    ):
        # s = |xi| runs forward; dW/ds = side * W'
        sol = dopri54(
            rhs(side), 0.0, np.array([u0, v0]), L,
            rtol=rtol, atol=atol, max_step=max_step,
            events=[("tail", lambda y, a=asym: switch - abs(y[0] - a))],
        )
        s = np.abs(xi[sel])
        s_end = sol.t[-1]
        inside = s <= s_end
        k = np.clip(np.searchsorted(sol.t, s[inside], side="right") - 1, 0, sol.t.size - 2)
        hk = sol.t[k + 1] - sol.t[k]
        tau = (s[inside] - sol.t[k]) / hk
        pts = hermite(sol.y[k], sol.f[k], sol.y[k + 1], sol.f[k + 1], hk[:, None], tau[:, None])

        Ws = np.empty(s.size)
        Vs = np.empty(s.size)
        Ws[inside], Vs[inside] = pts[:, 0], pts[:, 1]
        w_end = sol.y[-1, 0]
        Ws[~inside] = asym + (w_end - asym) * np.exp(-rate * (s[~inside] - s_end))
        Vs[~inside] = -side * rate * (Ws[~inside] - asym)
        W[sel], Wp[sel] = Ws, Vs

    return _assemble(p, jump, xi, W, Wp, L, n, "direct")


# }}}


# {{{ reference profiles


def peakon_profile(L: float = 40.0, n: int = 8001) -> Profile:
    """``U(y) = (4/3) exp(-|y|/2)`` with its kink at 0; travels at speed 4/3."""
    y = np.linspace(-L, L, n)
    U = (4.0 / 3.0) * np.exp(-0.5 * np.abs(y))
    Up = -0.5 * np.sign(y) * U
    has_zero = GridFunction(-L, L, U, 0.0, 0.0).node_index(0.0) is not None
    deriv_jump = (2.0 / 3.0, -2.0 / 3.0)
    if has_zero:
        Up[np.argmin(np.abs(y))] = 0.0
    return Profile(
        grid=GridFunction(-L, L, U, 0.0, 0.0, kinks=(0.0,)),
        derivative_grid=GridFunction(-L, L, Up, 0.0, 0.0, jump=deriv_jump),
        second_derivative_grid=GridFunction(-L, L, 0.25 * U, 0.0, 0.0, kinks=(0.0,)),
        c=PEAKON_SPEED,
    )


def step_profile(A: float, B: float, L: float = 40.0, n: int = 4001) -> Profile:
    """Piecewise constant ``A`` for ``xi < 0`` and ``B`` for ``xi > 0``."""
    if A == B:
        raise ValueError("a step needs A != B")
    xi = np.linspace(-L, L, n)
    W = np.where(xi < 0.0, float(A), float(B))
    W[np.abs(xi) <= 1.0e-12 * L] = 0.5 * (A + B)
    zeros = np.zeros(n)
    return Profile(
        grid=GridFunction(-L, L, W, A, B, jump=(A, B)),
        derivative_grid=GridFunction(-L, L, zeros, 0.0, 0.0, jump=(0.0, 0.0)),
        second_derivative_grid=GridFunction(-L, L, zeros, 0.0, 0.0, jump=(0.0, 0.0)),
    )


def constant_profile(k: float, L: float = 40.0, n: int = 401) -> Profile:
    zeros = np.zeros(n)
    return Profile(
        grid=GridFunction(-L, L, np.full(n, float(k)), k, k),
        derivative_grid=GridFunction(-L, L, zeros, 0.0, 0.0),
        second_derivative_grid=GridFunction(-L, L, zeros, 0.0, 0.0),
    )


# }}}


# {{{ files


def save_profile(profile: Profile, path: str | Path, extra: dict | None = None) -> Path:
    """Write ``xi,W,Wprime`` rows and a JSON manifest (same stem, ``.json``)."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write("xi,W,Wprime\n")
        for x, w, wp in zip(profile.xi, profile.grid.samples, profile.derivative_grid.samples):
            fh.write(",".join(map(repr, (float(x), float(w), float(wp)))) + "\n")

    manifest = {
        "W": profile.grid.sidecar(),
        "Wprime": profile.derivative_grid.sidecar(),
        "c": profile.c,
        "L": profile.grid.right_end,
        "n": profile.grid.n,
    }
    if isinstance(profile, ShockProfile):
        manifest.update(
            params=profile.params.to_dict(),
            jump=profile.jump.to_dict(),
            method=profile.method,
            tail_errors=profile.tail_errors,
        )
    manifest.update(extra or {})
    path.with_suffix(".json").write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_profile(path: str | Path) -> Profile:
    path = Path(path)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty file, reported below
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.size == 0:
            raise ValueError("no data rows")
        meta = json.loads(path.with_suffix(".json").read_text())
        if data.shape[1] != 3:
            raise ValueError(f"expected 3 columns xi,W,Wprime, got {data.shape[1]}")
        W = GridFunction.from_columns(data[:, 0], data[:, 1], meta["W"])
        Wp = GridFunction.from_columns(data[:, 0], data[:, 2], meta["Wprime"])
    except (OSError, KeyError, ValueError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc
    if not all(math.isfinite(v) for v in (W.left_tail, W.right_tail)):
        raise ProfileError("non-finite tails")
    return Profile(grid=W, derivative_grid=Wp, c=meta.get("c"))


# }}}
