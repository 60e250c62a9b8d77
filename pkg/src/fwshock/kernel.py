r"""Fornberg-Whitham kernel and convolutions against sampled profiles.

The kernel :math:`K(x) = e^{-|x|}/2` inverts :math:`1 - \partial_x^2`.  Because
it is a two-sided exponential, a convolution splits into a left and a right
exponential sweep,

.. math::

    (K * f)(x) = \tfrac12 (L(x) + R(x)), \qquad (K' * f)(x) = \tfrac12 (R(x) - L(x)),

with :math:`L(x) = \int_{-\infty}^x e^{-(x-y)} f(y)\,dy` and
:math:`R(x) = \int_x^\infty e^{-(y-x)} f(y)\,dy`.  Both sweeps are accumulated
panel by panel (Gauss-Legendre on each grid cell) and the parts outside the
grid are added in closed form from the declared constant tails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import accumulate
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import lfilter

__all__ = [
    "GridFunction",
    "KernelQuadratureConfig",
    "cell_convolutions",
    "convolve_K",
    "convolve_Kprime",
    "eval_kernel",
    "eval_kernel_derivative",
]


def eval_kernel(x):
    """:math:`K(x) = e^{-|x|}/2`."""
    out = 0.5 * np.exp(-np.abs(x))
    return float(out) if np.ndim(out) == 0 else out


def eval_kernel_derivative(x):
    """Classical derivative :math:`-\\operatorname{sgn}(x) e^{-|x|}/2`, with ``K'(0) = 0``."""
    out = -0.5 * np.sign(x) * np.exp(-np.abs(x))
    return float(out) if np.ndim(out) == 0 else out


# {{{ grid functions


def _lagrange_eval(xs: np.ndarray, ys: np.ndarray, x: np.ndarray, order: int) -> np.ndarray:
    m = xs.size
    p = min(order, m)
    if p == 1:
        return np.full_like(x, ys[0])

    k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, m - 2)
    start = np.clip(k - (p // 2 - 1), 0, m - p)
    idx = start[:, None] + np.arange(p)
    X = xs[idx]
    Y = ys[idx]
    diff = x[:, None] - X

    out = np.zeros_like(x)
    for j in range(p):
        num = np.ones_like(x)
        den = np.ones_like(x)
        for i in range(p):
            if i != j:
                num *= diff[:, i]
                den *= X[:, j] - X[:, i]
        out += Y[:, j] * num / den
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Uniform samples on ``[left_end, right_end]`` with constant tails.

    Outside the sampled interval the function equals ``left_tail`` or
    ``right_tail``.  An optional ``jump = (value_left_of_0, value_right_of_0)``
    marks a discontinuity at 0; ``kinks`` lists points where the derivative
    jumps.  Both split the function into smooth pieces which are interpolated
    separately, so interpolation never straddles them.
    """

    left_end: float
    right_end: float
    samples: np.ndarray
    left_tail: float
    right_tail: float
    jump: tuple[float, float] | None = None
    kinks: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not self.left_end < self.right_end:
            raise ValueError(f"left_end {self.left_end} must be < right_end {self.right_end}")
        if not (math.isfinite(self.left_tail) and math.isfinite(self.right_tail)):
            raise ValueError("tails must be finite")
        if self.jump is not None:
            jl, jr = (float(v) for v in self.jump)
            if not (math.isfinite(jl) and math.isfinite(jr)):
                raise ValueError("jump values must be finite")
            if not self.left_end < 0.0 < self.right_end:
                raise ValueError("a jump at 0 needs 0 strictly inside the grid")
            object.__setattr__(self, "jump", (jl, jr))
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "left_end", float(self.left_end))
        object.__setattr__(self, "right_end", float(self.right_end))
        object.__setattr__(self, "left_tail", float(self.left_tail))
        object.__setattr__(self, "right_tail", float(self.right_tail))
        object.__setattr__(self, "kinks", tuple(sorted(float(k) for k in self.kinks)))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def dx(self) -> float:
        return (self.right_end - self.left_end) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.left_end, self.right_end, self.n)
        x.setflags(write=False)
        return x

    def node_index(self, x: float) -> int | None:
        """Index of the grid node at ``x``, or None if ``x`` is not a node."""
        k = round((x - self.left_end) / self.dx)
        if 0 <= k < self.n and abs(self.nodes[k] - x) <= 1.0e-9 * self.dx:
            return int(k)
        return None

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        if self.jump is not None:
            pts.add(0.0)
        for k in self.kinks:
            if self.left_end < k < self.right_end:
                pts.add(k)
        return tuple(sorted(pts))

    def _boundary_value(self, x: float, side: str) -> float | None:
        # value at a piece boundary as seen from inside the piece
        if x == self.left_end:
            return float(self.samples[0])
        if x == self.right_end:
            return float(self.samples[-1])
        if self.jump is not None and x == 0.0:
            return self.jump[0] if side == "left" else self.jump[1]
        k = self.node_index(x)
        return None if k is None else float(self.samples[k])

    @cached_property
    def pieces(self) -> tuple[tuple[float, float, np.ndarray, np.ndarray], ...]:
        edges = (self.left_end, *self.breakpoints, self.right_end)
        tol = 1.0e-9 * self.dx
        x = self.nodes
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            mask = (x > a + tol) & (x < b - tol)
            xs, ys = list(x[mask]), list(self.samples[mask])
            va = self._boundary_value(a, "right")
            vb = self._boundary_value(b, "left")
            if va is not None:
                xs.insert(0, a)
                ys.insert(0, va)
            if vb is not None:
                xs.append(b)
                ys.append(vb)
            if len(xs) < 2:
                raise ValueError(f"piece [{a}, {b}] holds fewer than two samples")
            out.append((a, b, np.array(xs), np.array(ys)))
        return tuple(out)

    def evaluate(self, x, order: int = 4):
        """Piecewise Lagrange interpolant of the samples, tails outside.

        At a breakpoint the value from the right piece is returned.
        """
        xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.empty_like(xa)
        lo = xa < self.left_end
        hi = xa > self.right_end
        out[lo] = self.left_tail
        out[hi] = self.right_tail

        inside = ~(lo | hi)
        if np.any(inside):
            xi = xa[inside]
            which = np.searchsorted(np.array(self.breakpoints), xi, side="right")
            vals = np.empty_like(xi)
            for k, (_, _, xs, ys) in enumerate(self.pieces):
                sel = which == k
                if np.any(sel):
                    vals[sel] = _lagrange_eval(xs, ys, xi[sel], order)
            out[inside] = vals

        return float(out[0]) if np.ndim(x) == 0 else out

    __call__ = evaluate

    def tails_consistent(self, slope_bound: float) -> bool:
        """Check that the end samples sit within ``10 dx slope_bound`` of the tails."""
        tol = 10.0 * self.dx * slope_bound
        return (
            abs(self.samples[0] - self.left_tail) <= tol
            and abs(self.samples[-1] - self.right_tail) <= tol
        )

    # {{{ serialization

    def sidecar(self) -> dict:
        return {
            "left_tail": self.left_tail,
            "right_tail": self.right_tail,
            "jump_left": None if self.jump is None else self.jump[0],
            "jump_right": None if self.jump is None else self.jump[1],
            "kinks": list(self.kinks),
        }

    def to_csv(self, path: str | Path) -> Path:
        """Write ``xi,value`` rows and a JSON sidecar next to them."""
        path = Path(path)
        with path.open("w") as fh:
            fh.write("xi,value\n")
            for xi, v in zip(self.nodes, self.samples):
                fh.write(",".join(map(repr, (float(xi), float(v)))) + "\n")
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2) + "\n")
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> GridFunction:
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_suffix(".json").read_text())
        return cls.from_columns(data[:, 0], data[:, 1], meta)

    @classmethod
    def from_columns(cls, xi: np.ndarray, values: np.ndarray, meta: dict) -> GridFunction:
        xi = np.asarray(xi, dtype=np.float64)
        if xi.size < 2:
            raise ValueError("need at least two rows")
        spacing = np.diff(xi)
        if np.any(spacing <= 0) or np.ptp(spacing) > 1.0e-6 * spacing.mean():
            raise ValueError("abscissae must be uniformly increasing")
        jump = None
        if meta.get("jump_left") is not None:
            jump = (meta["jump_left"], meta["jump_right"])
        return cls(
            left_end=float(xi[0]),
            right_end=float(xi[-1]),
            samples=values,
            left_tail=meta["left_tail"],
            right_tail=meta["right_tail"],
            jump=jump,
            kinks=tuple(meta.get("kinks", ())),
        )

    # }}}


# }}}


# {{{ convolution


@dataclass(frozen=True)
class KernelQuadratureConfig:
    """Panel quadrature settings.

    ``panel_order`` is both the number of Gauss-Legendre points per panel and
    the number of samples in the local interpolation stencil.
    """

    panel_order: int = 4
    split_at_jump: bool = True
    split_at_kinks: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.panel_order < 2:
            raise ValueError(f"panel_order must be >= 2, got {self.panel_order}")

    def to_dict(self) -> dict:
        return {
            "panel_order": self.panel_order,
            "split_at_jump": self.split_at_jump,
            "split_at_kinks": list(self.split_at_kinks),
        }


DEFAULT_QUADRATURE = KernelQuadratureConfig()


def _panel_edges(f: GridFunction, cfg: KernelQuadratureConfig) -> np.ndarray:
    extra = set(f.kinks) | set(cfg.split_at_kinks)
    if cfg.split_at_jump and f.jump is not None:
        extra.add(0.0)
    extra = [e for e in extra if f.left_end < e < f.right_end and f.node_index(e) is None]
    return np.union1d(f.nodes, np.array(extra, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class _Sweep:
    edges: np.ndarray
    left: np.ndarray  # L at the panel edges
    right: np.ndarray  # R at the panel edges


def _sweep(f: GridFunction, cfg: KernelQuadratureConfig) -> _Sweep:
    s = _panel_edges(f, cfg)
    h = np.diff(s)
    g, w = leggauss(cfg.panel_order)
    y = s[:-1, None] + 0.5 * h[:, None] * (1.0 + g)
    fy = f.evaluate(y.ravel(), order=cfg.panel_order).reshape(y.shape)
    half = 0.5 * h
    lseg = half * np.sum(w * np.exp(-(s[1:, None] - y)) * fy, axis=1)
    rseg = half * np.sum(w * np.exp(-(y - s[:-1, None])) * fy, axis=1)
    decay = np.exp(-h)

    left = np.fromiter(
        accumulate(zip(decay, lseg), lambda acc, dl: dl[0] * acc + dl[1], initial=f.left_tail),
        dtype=np.float64,
        count=s.size,
    )
    right = np.fromiter(
        accumulate(
            zip(decay[::-1], rseg[::-1]), lambda acc, dr: dr[0] * acc + dr[1], initial=f.right_tail
        ),
        dtype=np.float64,
        count=s.size,
    )[::-1]
    return _Sweep(s, left, right)


def _sweeps_at(f: GridFunction, at, cfg: KernelQuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    a = np.atleast_1d(np.asarray(at, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise ValueError("evaluation points must be finite")

    sw = _sweep(f, cfg)
    s = sw.edges
    L = np.empty_like(a)
    R = np.empty_like(a)

    lo = a < s[0]
    if np.any(lo):
        e = np.exp(-(s[0] - a[lo]))
        L[lo] = f.left_tail
        R[lo] = f.left_tail * (1.0 - e) + e * sw.right[0]
    hi = a > s[-1]
    if np.any(hi):
        e = np.exp(-(a[hi] - s[-1]))
        R[hi] = f.right_tail
        L[hi] = f.right_tail * (1.0 - e) + e * sw.left[-1]

    mid = ~(lo | hi)
    if np.any(mid):
        am = a[mid]
        j = np.clip(np.searchsorted(s, am, side="right") - 1, 0, s.size - 2)
        sl, sr = s[j], s[j + 1]
        g, w = leggauss(cfg.panel_order)

        # partial panel [s_j, a] for L and [a, s_{j+1}] for R
        ll = am - sl
        yl = sl[:, None] + 0.5 * ll[:, None] * (1.0 + g)
        fl = f.evaluate(yl.ravel(), order=cfg.panel_order).reshape(yl.shape)
        part_l = 0.5 * ll * np.sum(w * np.exp(-(am[:, None] - yl)) * fl, axis=1)

        lr = sr - am
        yr = am[:, None] + 0.5 * lr[:, None] * (1.0 + g)
        fr = f.evaluate(yr.ravel(), order=cfg.panel_order).reshape(yr.shape)
        part_r = 0.5 * lr * np.sum(w * np.exp(-(yr - am[:, None])) * fr, axis=1)

        L[mid] = np.exp(-ll) * sw.left[j] + part_l
        R[mid] = np.exp(-lr) * sw.right[j + 1] + part_r

    return L, R


def convolve_K(f: GridFunction, at, cfg: KernelQuadratureConfig | None = None):
    """Evaluate :math:`(K * f)` at ``at`` (scalar or array)."""
    L, R = _sweeps_at(f, at, cfg or DEFAULT_QUADRATURE)
    out = 0.5 * (L + R)
    return float(out[0]) if np.ndim(at) == 0 else out


def convolve_Kprime(f: GridFunction, at, cfg: KernelQuadratureConfig | None = None):
    """Evaluate :math:`(K' * f)` at ``at`` (scalar or array)."""
    L, R = _sweeps_at(f, at, cfg or DEFAULT_QUADRATURE)
    out = 0.5 * (R - L)
    return float(out[0]) if np.ndim(at) == 0 else out


def cell_convolutions(
    values: np.ndarray, dx: float, left_tail: float, right_tail: float
) -> tuple[np.ndarray, np.ndarray]:
    """:math:`K * u` and :math:`K' * u` at cell centres of a piecewise-constant ``u``.

    Each cell value is integrated exactly against the kernel; the two sweeps
    are linear recurrences and run through :func:`scipy.signal.lfilter`.
    """
    u = np.asarray(values, dtype=np.float64)
    q = math.exp(-dx)
    qh = math.exp(-0.5 * dx)
    g = 1.0 - qh

    prev = np.concatenate(([left_tail], u[:-1]))
    vl = g * (qh * prev + u)
    L, _ = lfilter([1.0], [1.0, -q], vl, zi=[q * left_tail])

    nxt = np.concatenate((u[1:], [right_tail]))
    vr = g * (qh * nxt + u)
    R, _ = lfilter([1.0], [1.0, -q], vr[::-1], zi=[q * right_tail])
    R = R[::-1]

    return 0.5 * (L + R), 0.5 * (R - L)


# }}}
