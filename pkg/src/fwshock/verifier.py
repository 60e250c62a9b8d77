"""Weak-solution checks for a candidate traveling-wave profile.

A piecewise smooth profile ``W`` with a jump at 0 gives a weak traveling
wave of speed ``c`` exactly when

* ``W(0+) + W(0-) = 2c`` and
* ``(W - c) W' + K' * W = 0`` for every ``xi != 0``.

The remaining checks are consequences used as diagnostics: ``W'(0+) + W'(0-) = 0``,
``(W - c)**2/2 + K * W = alpha``, the second-order profile equation, and
the weak traveling form itself tested against polynomial bumps.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from fwshock.kernel import (
    DEFAULT_QUADRATURE,
    GridFunction,
    KernelQuadratureConfig,
    convolve_K,
    convolve_Kprime,
)
from fwshock.phase_plane import WaveParams
from fwshock.profile import Profile

__all__ = [
    "BUILTIN_BUMPS",
    "BumpTest",
    "ResidualReport",
    "Tolerances",
    "VerificationError",
    "check_derivative_condition",
    "check_rankine_hugoniot",
    "evaluate_weak_traveling_form",
    "full_report",
    "residual_const",
    "residual_second_order",
    "residual_wode1",
    "wode1_at",
]


class VerificationError(ValueError):
    pass


# {{{ profile coercion


def _derivative_matrix_row(X: np.ndarray, j: int) -> np.ndarray:
    # derivative at X[j] of the Lagrange basis on the stencil X
    p = X.size
    row = np.empty(p)
    for i in range(p):
        if i == j:
            row[i] = sum(1.0 / (X[j] - X[m]) for m in range(p) if m != j)
        else:
            num = np.prod([X[j] - X[m] for m in range(p) if m not in (i, j)])
            den = np.prod([X[i] - X[m] for m in range(p) if m != i])
            row[i] = num / den
    return row


def _node_derivative(gf: GridFunction, order: int = 5) -> GridFunction:
    """Differentiate the piecewise interpolant at the grid nodes."""
    out = np.zeros(gf.n)
    one_sided = []
    for a, b, xs, ys in gf.pieces:
        m = xs.size
        p = min(order, m)
        d = np.empty(m)
        for j in range(m):
            s = min(max(j - p // 2, 0), m - p)
            d[j] = _derivative_matrix_row(xs[s : s + p], j - s) @ ys[s : s + p]
        one_sided.append((xs, d))

    x = gf.nodes
    for xs, d in one_sided:
        idx = np.array([gf.node_index(v) for v in xs], dtype=object)
        for k, v in zip(idx, d):
            if k is not None:
                out[k] = v
    jump = None
    if gf.jump is not None:
        k = list(gf.breakpoints).index(0.0)
        jump = (float(one_sided[k][1][-1]), float(one_sided[k + 1][1][0]))
        k0 = gf.node_index(0.0)
        if k0 is not None:
            out[k0] = 0.5 * sum(jump)
    del x
    return GridFunction(gf.left_end, gf.right_end, out, 0.0, 0.0, jump=jump, kinks=gf.kinks)


def _as_profile(obj) -> Profile:
    if isinstance(obj, Profile):
        return obj
    if isinstance(obj, GridFunction):
        return Profile(grid=obj, derivative_grid=_node_derivative(obj))
    raise TypeError(f"expected a Profile or GridFunction, got {type(obj).__name__}")


def _off_jump(profile: Profile) -> np.ndarray:
    xi = profile.xi
    if profile.has_jump:
        return np.abs(xi) > 1.0e-12 * profile.grid.dx
    return np.ones(xi.size, dtype=bool)


# }}}


# {{{ pointwise checks


def check_rankine_hugoniot(profile, c: float) -> float:
    """``|W(0+) + W(0-) - 2c|``; 0 for a profile without a jump."""
    profile = _as_profile(profile)
    if not profile.has_jump:
        return 0.0
    wl, wr = profile.grid.jump
    return abs(wr + wl - 2.0 * c)


def check_derivative_condition(profile) -> float:
    """``|W'(0+) + W'(0-)|``; 0 for a profile without a jump in ``W``."""
    profile = _as_profile(profile)
    if not profile.has_jump:
        return 0.0
    if profile.derivative_grid.jump is None:
        raise VerificationError("profile has a jump but no one-sided derivatives at 0")
    vl, vr = profile.derivative_grid.jump
    return abs(vr + vl)


def wode1_at(profile, c: float, xi, cfg: KernelQuadratureConfig | None = None) -> np.ndarray:
    """Pointwise ``(W - c) W' + K' * W`` at arbitrary ``xi != 0``."""
    profile = _as_profile(profile)
    cfg = cfg or DEFAULT_QUADRATURE
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    W = profile.grid.evaluate(xi, order=cfg.panel_order)
    Wp = profile.derivative_grid.evaluate(xi, order=cfg.panel_order)
    return (W - c) * Wp + convolve_Kprime(profile.grid, xi, cfg)


def residual_wode1(
    profile, c: float, xi_min: float = 0.1, cfg: KernelQuadratureConfig | None = None
) -> float:
    """Sup of ``|(W - c) W' + K' * W|`` over grid nodes with ``|xi| >= xi_min``."""
    if not xi_min > 0.0:
        raise ValueError("xi_min must be positive")
    profile = _as_profile(profile)
    xi = profile.xi
    sel = np.abs(xi) >= xi_min
    if not np.any(sel):
        return 0.0
    W = profile.grid.samples[sel]
    Wp = profile.derivative_grid.samples[sel]
    r = (W - c) * Wp + convolve_Kprime(profile.grid, xi[sel], cfg or DEFAULT_QUADRATURE)
    return float(np.max(np.abs(r)))


def residual_const(profile, p: WaveParams, cfg: KernelQuadratureConfig | None = None) -> float:
    """Sup of ``|(W - c)**2/2 + K * W - alpha|`` over the grid nodes."""
    profile = _as_profile(profile)
    sel = _off_jump(profile)
    xi = profile.xi[sel]
    W = profile.grid.samples[sel]
    r = 0.5 * (W - p.c) ** 2 + convolve_K(profile.grid, xi, cfg or DEFAULT_QUADRATURE) - p.alpha
    return float(np.max(np.abs(r)))


def residual_second_order(profile, p: WaveParams, xi_min: float = 0.1) -> float:
    """Sup of ``|(W - c)**2/2 - W'**2 - (W - c) W'' + W - alpha|`` for ``|xi| >= xi_min``.

    ``W''`` comes from the profile when it carries one, otherwise from
    differentiating the sampled ``W'`` piecewise.
    """
    profile = _as_profile(profile)
    Wpp_grid = profile.second_derivative_grid
    if Wpp_grid is None:
        Wpp_grid = _node_derivative(profile.derivative_grid)
    sel = np.abs(profile.xi) >= xi_min
    W = profile.grid.samples[sel]
    Wp = profile.derivative_grid.samples[sel]
    Wpp = Wpp_grid.samples[sel]
    r = 0.5 * (W - p.c) ** 2 - Wp * Wp - (W - p.c) * Wpp + W - p.alpha
    return float(np.max(np.abs(r))) if r.size else 0.0


# }}}


# {{{ weak traveling form


def _bump(s):
    s = np.asarray(s)
    return np.where(np.abs(s) <= 1.0, (1.0 - s * s) ** 4, 0.0)


@dataclass(frozen=True)
class BumpTest:
    """Test function ``amp * b((x - c t - xi0)/sx - ...)`` in the co-moving frame.

    With ``b(s) = (1 - s**2)**4`` on ``[-1, 1]``,
    ``phi(x, t) = amplitude * b((x - c t0 - xi0)/sx) * b((t - t0)/st)``;
    ``xi0`` is the offset of the centre from the jump line ``x = c t``.
    """

    xi0: float
    t0: float
    sx: float
    st: float
    amplitude: float = 1.0

    def phi(self, c: float, x, t):
        return (
            self.amplitude
            * _bump((x - c * self.t0 - self.xi0) / self.sx)
            * _bump((t - self.t0) / self.st)
        )


BUILTIN_BUMPS: dict[str, BumpTest] = {
    "jump-line": BumpTest(xi0=0.0, t0=1.0, sx=1.0, st=1.0),
    "jump-line-early": BumpTest(xi0=0.0, t0=0.25, sx=2.0, st=1.0),
    "left": BumpTest(xi0=-2.0, t0=1.0, sx=1.0, st=0.5),
    "right": BumpTest(xi0=2.5, t0=1.0, sx=1.5, st=0.75),
    "zero": BumpTest(xi0=0.0, t0=1.0, sx=1.0, st=1.0, amplitude=0.0),
}


def _time_window(b: BumpTest, c: float, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # t-interval where phi(xi + c t, t) can be nonzero, clipped to t >= 0
    t_lo = np.full_like(xi, max(0.0, b.t0 - b.st))
    t_hi = np.full_like(xi, b.t0 + b.st)
    if c != 0.0:
        # |xi + c t - c t0 - xi0| <= sx
        a1 = (b.xi0 - b.sx - xi) / c + b.t0
        a2 = (b.xi0 + b.sx - xi) / c + b.t0
        t_lo = np.maximum(t_lo, np.minimum(a1, a2))
        t_hi = np.minimum(t_hi, np.maximum(a1, a2))
    return t_lo, t_hi


def evaluate_weak_traveling_form(
    profile,
    c: float,
    testfn: str | BumpTest,
    cfg: KernelQuadratureConfig | None = None,
    panel_width: float = 0.02,
    budget: int = 2_000_000,
) -> float:
    """Left side of the weak traveling-wave identity for one test function.

    Sum of the jump-line term and the two half-plane integrals of
    ``phi(xi + c t, t) [(W - c) W' + K' * W]``.  The ``t`` integral is done
    first, exactly (Gauss-Legendre on a polynomial), then ``xi`` by panels
    split at the jump.
    """
    profile = _as_profile(profile)
    cfg = cfg or DEFAULT_QUADRATURE
    b = BUILTIN_BUMPS[testfn] if isinstance(testfn, str) else testfn
    if b.amplitude == 0.0:
        return 0.0

    gt, wt = leggauss(10)

    def Phi(xi: np.ndarray) -> np.ndarray:
        t_lo, t_hi = _time_window(b, c, xi)
        span = np.maximum(t_hi - t_lo, 0.0)
        t = t_lo[:, None] + 0.5 * span[:, None] * (1.0 + gt)
        vals = b.phi(c, xi[:, None] + c * t, t)
        return 0.5 * span * np.sum(wt * vals, axis=1)

    # jump-line term: phi(c t, t) integrated over t >= 0
    total = 0.0
    if profile.has_jump:
        wl, wr = profile.grid.jump
        coeff = 0.5 * (wr * wr - wl * wl) + c * (wl - wr)
        total += coeff * float(Phi(np.array([0.0]))[0])

    # xi-support of the bump in the co-moving frame
    t_lo, t_hi = max(0.0, b.t0 - b.st), b.t0 + b.st
    if t_hi <= t_lo:
        return total
    ends = [b.xi0 - b.sx - c * (t - b.t0) for t in (t_lo, t_hi)]
    ends += [b.xi0 + b.sx - c * (t - b.t0) for t in (t_lo, t_hi)]
    x_lo, x_hi = min(ends), max(ends)
    breaks = [x_lo, x_hi] + ([0.0] if x_lo < 0.0 < x_hi else [])
    breaks = np.array(sorted(breaks))

    gx, wx = leggauss(8)
    pts, wts = [], []
    for a, e in zip(breaks[:-1], breaks[1:]):
        m = max(1, math.ceil((e - a) / panel_width))
        edges = np.linspace(a, e, m + 1)
        h = np.diff(edges)
        pts.append((edges[:-1, None] + 0.5 * h[:, None] * (1.0 + gx)).ravel())
        wts.append((0.5 * h[:, None] * wx).ravel())
    xi = np.concatenate(pts)
    w = np.concatenate(wts)
    if xi.size * 10 > budget:
        raise VerificationError(f"quadrature budget exceeded: {xi.size * 10} > {budget}")

    R = wode1_at(profile, c, xi, cfg)
    total += float(np.sum(w * Phi(xi) * R))
    return total


# }}}


# {{{ report


@dataclass(frozen=True)
class Tolerances:
    rh: float = 1.0e-9
    deriv: float = 1.0e-9
    wode1: float = 1.0e-4
    const: float = 1.0e-4
    second_order: float = 1.0e-4
    weak_form: float = 1.0e-4


@dataclass(frozen=True)
class ResidualReport:
    rh_residual: float
    deriv_residual: float
    wode1_sup: float
    const_sup: float
    second_order_sup: float
    weak_form_values: list[tuple[str, float]]
    xi_min: float
    grid: dict
    quadrature: dict
    c: float
    alpha: float
    wode1_probes: list[tuple[float, float]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        cfg = {"xi_min": self.xi_min, "grid": self.grid, "quadrature": self.quadrature}
        return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]

    def failures(self, tol: Tolerances | None = None) -> list[str]:
        tol = tol or Tolerances()
        checks = [
            ("rh_residual", self.rh_residual, tol.rh),
            ("deriv_residual", self.deriv_residual, tol.deriv),
            ("wode1_sup", self.wode1_sup, tol.wode1),
            ("const_sup", self.const_sup, tol.const),
            ("second_order_sup", self.second_order_sup, tol.second_order),
        ]
        checks += [(f"weak_form[{k}]", abs(v), tol.weak_form) for k, v in self.weak_form_values]
        return [name for name, val, lim in checks if not val <= lim]

    def passes(self, tol: Tolerances | None = None) -> bool:
        return not self.failures(tol)

    def to_dict(self, tol: Tolerances | None = None) -> dict:
        out = asdict(self)
        out["weak_form_values"] = [{"test": k, "value": v} for k, v in self.weak_form_values]
        out["wode1_probes"] = [{"xi": x, "value": v} for x, v in self.wode1_probes]
        out["config_hash"] = self.config_hash
        tol = tol or Tolerances()
        out["tolerances"] = asdict(tol)
        out["failures"] = self.failures(tol)
        return out

    def to_json(self, tol: Tolerances | None = None) -> str:
        return json.dumps(self.to_dict(tol), indent=2)


def full_report(
    profile,
    p: WaveParams,
    cfg: KernelQuadratureConfig | None = None,
    xi_min: float = 0.1,
    bumps: tuple[str, ...] = ("jump-line", "jump-line-early", "left", "right"),
) -> ResidualReport:
    profile = _as_profile(profile)
    cfg = cfg or DEFAULT_QUADRATURE
    flags = []
    if not profile.has_jump:
        flags.append("no jump: Rankine-Hugoniot and derivative conditions not applicable")
    if profile.second_derivative_grid is None:
        flags.append("W'' from differentiated samples")
    g = profile.grid
    probes = [x for x in (-1.0, 1.0) if g.left_end <= x <= g.right_end]
    probe_vals = wode1_at(profile, p.c, probes, cfg) if probes else []
    return ResidualReport(
        rh_residual=check_rankine_hugoniot(profile, p.c),
        deriv_residual=check_derivative_condition(profile),
        wode1_sup=residual_wode1(profile, p.c, xi_min, cfg),
        const_sup=residual_const(profile, p, cfg),
        second_order_sup=residual_second_order(profile, p, xi_min),
        weak_form_values=[(k, evaluate_weak_traveling_form(profile, p.c, k, cfg)) for k in bumps],
        xi_min=xi_min,
        grid={"left_end": g.left_end, "right_end": g.right_end, "n": g.n, "dx": g.dx},
        quadrature=cfg.to_dict(),
        c=p.c,
        alpha=p.alpha,
        wode1_probes=[(x, float(v)) for x, v in zip(probes, probe_vals)],
        flags=flags,
    )


# }}}
