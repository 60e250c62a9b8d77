"""Traveling-wave parameters and the planar system for the profile.

A profile ``W(xi)`` moving at speed ``c`` with asymptotes ``A`` (left) and
``B`` (right) is reparametrised by ``xi = h(z)``, ``h' = W(h) - c``; the pair
``(U, V) = (W, W')(h(z))`` then solves

    U' = (U - c) V,
    V' = -V**2 + U**2/2 + (1 - c) U + c**2/2 - alpha,

which conserves

    H(U, V) = (U - c)**2 (V**2 - U**2/4 + (3c - 4) U/6 + alpha - c**2/4 - c/3).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "PlanarPoint",
    "RegimeDiagnostics",
    "RegimeError",
    "SaddleData",
    "WaveParams",
    "equilibria",
    "first_integral_H",
    "jacobian",
    "make_params",
    "regime_diagnostics",
    "saddle_data",
    "vector_field",
]


class RegimeError(ValueError):
    """Parameters outside the regime an operation needs."""


@dataclass(frozen=True)
class PlanarPoint:
    U: float
    V: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.U) and math.isfinite(self.V)):
            raise ValueError(f"non-finite planar point ({self.U}, {self.V})")

    def __iter__(self):
        yield self.U
        yield self.V

    def as_array(self) -> np.ndarray:
        return np.array([self.U, self.V])


@dataclass(frozen=True)
class WaveParams:
    A: float
    B: float
    c: float
    alpha: float

    @property
    def shock_regime(self) -> bool:
        return self.B + 2.0 < self.c < self.A

    @classmethod
    def continuous(cls, level: float, c: float) -> WaveParams:
        """Parameters for profiles with equal asymptotes (constants, peakons).

        Any speed is admissible here; ``alpha`` follows from the tail level.
        """
        return cls(A=level, B=level, c=c, alpha=0.5 * (level - c) ** 2 + level)

    def to_dict(self) -> dict:
        return {**asdict(self), "shock_regime": self.shock_regime}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> WaveParams:
        return cls(A=data["A"], B=data["B"], c=data["c"], alpha=data["alpha"])


def make_params(A: float, B: float) -> WaveParams:
    """Derive ``c = 1 + (A + B)/2`` and ``alpha = (A - c)**2/2 + A`` for ``A > B``."""
    A, B = float(A), float(B)
    if not (math.isfinite(A) and math.isfinite(B)):
        raise ValueError("A and B must be finite")
    if not A > B:
        raise RegimeError(f"need A > B for a shock profile, got A={A}, B={B}")
    c = 1.0 + 0.5 * (A + B)
    alpha = 0.5 * (A - c) ** 2 + A
    return WaveParams(A=A, B=B, c=c, alpha=alpha)


def vector_field(p: WaveParams, x: PlanarPoint) -> PlanarPoint:
    U, V = x
    c = p.c
    return PlanarPoint(
        (U - c) * V,
        -V * V + 0.5 * U * U + (1.0 - c) * U + 0.5 * c * c - p.alpha,
    )


def jacobian(p: WaveParams, x: PlanarPoint) -> np.ndarray:
    U, V = x
    c = p.c
    return np.array([[V, U - c], [U + 1.0 - c, -2.0 * V]])


def equilibria(p: WaveParams) -> tuple[PlanarPoint, PlanarPoint]:
    """Return ``(S_minus, S_plus)`` on the U axis."""
    disc = 1.0 + 2.0 * (p.alpha - p.c)
    if disc < 0.0:
        raise RegimeError(f"no equilibria: 1 + 2(alpha - c) = {disc} < 0")
    r = math.sqrt(disc)
    return PlanarPoint(p.c - 1.0 - r, 0.0), PlanarPoint(p.c - 1.0 + r, 0.0)


@dataclass(frozen=True)
class SaddleData:
    """Linearisation at a saddle.

    Eigenvectors keep the unnormalised closed form; ``unstable_direction`` and
    ``stable_direction`` are unit copies.
    """

    location: PlanarPoint
    eigenvalue_neg: float
    eigenvalue_pos: float
    eigvec_neg: tuple[float, float]
    eigvec_pos: tuple[float, float]

    @property
    def unstable_direction(self) -> np.ndarray:
        v = np.asarray(self.eigvec_pos)
        return v / np.linalg.norm(v)

    @property
    def stable_direction(self) -> np.ndarray:
        v = np.asarray(self.eigvec_neg)
        return v / np.linalg.norm(v)


def saddle_data(p: WaveParams) -> tuple[SaddleData, SaddleData]:
    """Saddle structure at ``S_- = (B, 0)`` and ``S_+ = (A, 0)``; needs ``A > B + 2``."""
    d = p.A - p.B
    if not d > 2.0:
        raise RegimeError(f"S_+ is a saddle only for A > B + 2, got A - B = {d}")
    lam = 0.5 * math.sqrt(d * (2.0 + d))
    mu = 0.5 * math.sqrt(d * (d - 2.0))
    sm = SaddleData(
        location=PlanarPoint(p.B, 0.0),
        eigenvalue_neg=-lam,
        eigenvalue_pos=lam,
        eigvec_neg=(math.sqrt(2.0 + d), math.sqrt(d)),
        eigvec_pos=(math.sqrt(2.0 + d), -math.sqrt(d)),
    )
    sp = SaddleData(
        location=PlanarPoint(p.A, 0.0),
        eigenvalue_neg=-mu,
        eigenvalue_pos=mu,
        eigvec_neg=(math.sqrt(d - 2.0), -math.sqrt(d)),
        eigvec_pos=(math.sqrt(d - 2.0), math.sqrt(d)),
    )
    return sm, sp


def first_integral_H(p: WaveParams, x: PlanarPoint) -> float:
    U, V = x
    c = p.c
    return (U - c) ** 2 * (
        V * V - 0.25 * U * U + (3.0 * c - 4.0) * U / 6.0 + p.alpha - 0.25 * c * c - c / 3.0
    )


def H_array(p: WaveParams, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Vectorised :func:`first_integral_H`."""
    c = p.c
    return (U - c) ** 2 * (
        V * V - 0.25 * U * U + (3.0 * c - 4.0) * U / 6.0 + p.alpha - 0.25 * c * c - c / 3.0
    )


@dataclass(frozen=True)
class RegimeDiagnostics:
    alpha_le_c: bool
    small_jump: bool  # |A - B| <= 2
    shock_regime: bool
    note: str


def regime_diagnostics(p: WaveParams) -> RegimeDiagnostics:
    alpha_le_c = p.alpha <= p.c
    small_jump = abs(p.A - p.B) <= 2.0
    shock = p.shock_regime
    if shock:
        note = "B + 2 < c < A: both equilibria are saddles and W stays off U = c"
    elif p.A == p.B:
        note = "A = B: continuous profiles only, no shock construction"
    else:
        note = (
            f"A - B = {p.A - p.B:g} <= 2 (need A > B + 2): S_+ is not a saddle "
            "and the profile may reach U = c"
        )
    return RegimeDiagnostics(alpha_le_c, small_jump, shock, note)
