"""Finite-volume evolution of ``u_t + (u**2/2)_x + K' * u = 0`` on a finite window.

Cell averages live on a uniform grid; outside the window ``u`` is held at
the two tail constants, which serve both as ghost cells for the flux and as
the exterior of the convolution.  The flux is Rusanov (local Lax-Friedrichs)
on minmod-limited linear reconstructions; time stepping is the two-stage
SSP Runge-Kutta scheme with the nonlocal term as a source in each stage.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss

from fwshock.kernel import GridFunction, cell_convolutions
from fwshock.profile import Profile

__all__ = [
    "CflError",
    "FeatureExitError",
    "PdeState",
    "SimulationError",
    "WaveTrackReport",
    "cell_averages",
    "evolve",
    "rhs",
    "state_from_profile",
    "step",
    "track_wave",
]


class SimulationError(RuntimeError):
    pass


class CflError(SimulationError):
    pass


class FeatureExitError(SimulationError):
    def __init__(self, msg: str, time: float):
        super().__init__(msg)
        self.time = time


@dataclass(frozen=True, eq=False)
class PdeState:
    """Cell averages at the cell centres ``grid.nodes``; tails give the exterior."""

    grid: GridFunction
    time: float = 0.0
    cfl: float = 0.4
    step_count: int = 0
    nonlocal_term: bool = True
    reconstruction: str = "muscl"  # or "constant"

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if self.grid.n < 16:
            raise ValueError("at least 16 cells are required")
        if self.reconstruction not in ("muscl", "constant"):
            raise ValueError(f"unknown reconstruction {self.reconstruction!r}")

    @property
    def u(self) -> np.ndarray:
        return self.grid.samples

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def centres(self) -> np.ndarray:
        return self.grid.nodes

    def stable_dt(self) -> float:
        umax = max(float(np.max(np.abs(self.u))), abs(self.grid.left_tail), abs(self.grid.right_tail))
        return self.cfl * self.dx / max(umax, 1.0e-12)

    def with_values(self, u: np.ndarray, time: float, steps: int) -> PdeState:
        g = self.grid
        grid = GridFunction(g.left_end, g.right_end, u, g.left_tail, g.right_tail)
        return replace(self, grid=grid, time=time, step_count=steps)


# {{{ initial data


def cell_averages(profile: Profile | GridFunction, centres: np.ndarray, dx: float, shift: float = 0.0):
    """Averages of ``W(x - shift)`` over the cells ``[x - dx/2, x + dx/2]``.

    Gauss-Legendre on each cell, with cells that contain a breakpoint of
    ``W`` split there.  ``W`` is extended by its tail constants.
    """
    gf = profile.grid if isinstance(profile, Profile) else profile
    gx, wx = leggauss(6)
    lo = centres - 0.5 * dx - shift
    pts = lo[:, None] + 0.5 * dx * (1.0 + gx)
    avg = 0.5 * np.sum(wx * gf.evaluate(pts.ravel()).reshape(pts.shape), axis=1)

    for bp in gf.breakpoints:
        k = int(np.floor((bp - lo[0]) / dx))
        for i in (k - 1, k, k + 1):
            if not 0 <= i < centres.size:
                continue
            a, b = lo[i], lo[i] + dx
            if not a < bp < b:
                continue
            acc = 0.0
            for s, e in ((a, bp), (bp, b)):
                x = s + 0.5 * (e - s) * (1.0 + gx)
                # keep the left piece off the right-continuous breakpoint value
                x = np.minimum(x, np.nextafter(bp, -np.inf)) if e == bp else x
                acc += 0.5 * (e - s) * float(np.sum(wx * gf.evaluate(x)))
            avg[i] = acc / dx
    return avg


def state_from_profile(
    profile: Profile | GridFunction,
    left: float,
    right: float,
    n_cells: int,
    *,
    cfl: float = 0.4,
    nonlocal_term: bool = True,
    reconstruction: str = "muscl",
) -> PdeState:
    if not right > left:
        raise ValueError("empty domain")
    gf = profile.grid if isinstance(profile, Profile) else profile
    dx = (right - left) / n_cells
    centres = left + dx * (np.arange(n_cells) + 0.5)
    u = cell_averages(gf, centres, dx)
    grid = GridFunction(float(centres[0]), float(centres[-1]), u, gf.left_tail, gf.right_tail)
    return PdeState(grid, cfl=cfl, nonlocal_term=nonlocal_term, reconstruction=reconstruction)


# }}}


# {{{ scheme


def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def rhs(state: PdeState, u: np.ndarray | None = None) -> np.ndarray:
    """Semi-discrete right side ``-(F_{i+1/2} - F_{i-1/2})/dx - (K' * u)_i``."""
    u = state.u if u is None else u
    lt, rt = state.grid.left_tail, state.grid.right_tail
    ext = np.concatenate(([lt, lt], u, [rt, rt]))
    if state.reconstruction == "muscl":
        d = np.diff(ext)
        slope = np.concatenate(([0.0], _minmod(d[:-1], d[1:]), [0.0]))
    else:
        slope = np.zeros_like(ext)
    # interfaces between ext[j] and ext[j+1] for j = 1 .. n+1
    uL = ext[1:-2] + 0.5 * slope[1:-2]
    uR = ext[2:-1] - 0.5 * slope[2:-1]
    a = np.maximum(np.abs(uL), np.abs(uR))
    F = 0.25 * (uL * uL + uR * uR) - 0.5 * a * (uR - uL)
    out = -(F[1:] - F[:-1]) / state.dx
    if state.nonlocal_term:
        _, kp = cell_convolutions(u, state.dx, lt, rt)
        out -= kp
    return out


def step(state: PdeState, dt: float | None = None) -> PdeState:
    """One SSP-RK2 step; ``dt=None`` takes the CFL-limited step."""
    limit = state.stable_dt()
    if dt is None:
        dt = limit
    elif not 0.0 <= dt <= limit * (1.0 + 1.0e-12):
        raise CflError(f"dt = {dt:.3e} violates the CFL limit {limit:.3e}")
    u0 = state.u
    # overflow is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        u1 = u0 + dt * rhs(state, u0)
        u2 = 0.5 * u0 + 0.5 * (u1 + dt * rhs(state, u1))
    if not np.all(np.isfinite(u2)):
        raise SimulationError(f"non-finite state after step {state.step_count + 1}")
    return state.with_values(u2, state.time + dt, state.step_count + 1)


def evolve(state: PdeState, T: float) -> PdeState:
    """Step until ``time == T`` exactly, clipping the last step."""
    if T < state.time:
        raise ValueError(f"T = {T} precedes the current time {state.time}")
    while state.time < T:
        dt = min(state.stable_dt(), T - state.time)
        state = step(state, dt)
        if T - state.time <= 1.0e-13 * max(1.0, T):
            state = replace(state, time=T)
    return state


# }}}


# {{{ tracking


@dataclass(frozen=True)
class WaveTrackReport:
    measured_speed: float
    shape_error_L1: float
    shock_position_error: float  # in cells
    times_sampled: list[float]
    positions: list[float]
    feature: str
    c_expected: float
    dx: float
    shape_error_L1_abs: float = 0.0  # unnormalised, sum |u - W| dx
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("measured_speed", "shock_position_error"):
            if not math.isfinite(out[k]):
                out[k] = None
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _shock_position(x: np.ndarray, u: np.ndarray, dx: float) -> float:
    d = np.diff(u)
    i = int(np.argmin(d))
    pos = 0.5 * (x[i] + x[i + 1])
    if 0 < i < d.size - 1:
        # vertex of the parabola through the neighbouring differences
        dm, d0, dp = d[i - 1], d[i], d[i + 1]
        den = dm - 2.0 * d0 + dp
        if den != 0.0:
            pos += dx * float(np.clip(0.5 * (dm - dp) / den, -0.5, 0.5))
    return pos


def _peak_position(x: np.ndarray, u: np.ndarray, dx: float) -> float:
    i = int(np.argmax(u))
    pos = float(x[i])
    if 0 < i < u.size - 1:
        um, u0, up = u[i - 1], u[i], u[i + 1]
        den = um - 2.0 * u0 + up
        if den != 0.0:
            pos += dx * float(np.clip(0.5 * (um - up) / den, -0.5, 0.5))
    return pos


def _feature_of(profile: Profile | GridFunction) -> str:
    gf = profile.grid if isinstance(profile, Profile) else profile
    if np.ptp(gf.samples) == 0.0 and gf.left_tail == gf.right_tail and gf.jump is None:
        return "none"
    if gf.jump is not None:
        return "shock"
    return "peak"


def track_wave(
    initial: Profile | GridFunction,
    c_expected: float,
    T: float,
    samples: int,
    *,
    domain: tuple[float, float] = (-60.0, 60.0),
    n_cells: int = 6000,
    cfl: float = 0.4,
    nonlocal_term: bool = True,
    reconstruction: str = "muscl",
    snapshot_path: str | Path | None = None,
) -> WaveTrackReport:
    """Evolve profile data to ``T`` and measure how it translates.

    The feature (jump or peak) starts at ``xi = 0``; its position is sampled
    at ``samples`` equally spaced times including 0 and ``T``.
    """
    if samples < 2:
        raise ValueError("need at least two sample times")
    if not T > 0:
        raise ValueError("T must be positive")
    state = state_from_profile(
        initial, *domain, n_cells, cfl=cfl, nonlocal_term=nonlocal_term, reconstruction=reconstruction
    )
    feature = _feature_of(initial)
    x, dx = state.centres, state.dx
    locate = {"shock": _shock_position, "peak": _peak_position}.get(feature)
    margin = 5.0 * dx

    times = [float(t) for t in np.linspace(0.0, T, samples)]
    positions: list[float] = []
    snaps = []
    for t in times:
        state = evolve(state, t)
        if snapshot_path is not None:
            snaps.append((t, state.u.copy()))
        if locate is None:
            continue
        pos = locate(x, state.u, dx)
        if not domain[0] + margin < pos < domain[1] - margin:
            raise FeatureExitError(f"{feature} left the domain at t = {t:g}", t)
        positions.append(pos)

    flags = []
    if locate is None:
        speed = math.nan
        pos_err = math.nan
        flags.append("constant data: no feature to track")
    else:
        speed = float(np.polyfit(times, positions, 1)[0])
        pos_err = abs(positions[-1] - c_expected * T) / dx

    exact = cell_averages(initial, x, dx, shift=c_expected * T)
    norm = float(np.sum(np.abs(exact)))
    diff = float(np.sum(np.abs(state.u - exact)))
    shape = diff / norm if norm > 0.0 else diff
    if not nonlocal_term:
        flags.append("nonlocal term disabled")

    if snapshot_path is not None:
        write_snapshots(snapshot_path, x, snaps)

    return WaveTrackReport(
        measured_speed=speed,
        shape_error_L1=shape,
        shock_position_error=pos_err,
        times_sampled=times,
        positions=positions,
        feature=feature,
        c_expected=c_expected,
        dx=dx,
        shape_error_L1_abs=diff * dx,
        flags=flags,
    )


def write_snapshots(path: str | Path, x: np.ndarray, snaps) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("t,xi,u\n")
        for t, u in snaps:
            for xi, v in zip(x, u):
                fh.write(",".join(map(repr, (float(t), float(xi), float(v)))) + "\n")
    return path


# }}}
