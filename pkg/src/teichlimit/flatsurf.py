"""Flat geometry of the three slit tori under the diagonal flow.

On torus i the vertical direction is the slope-theta_i direction.  A closed
curve with holonomy (q, p) has a component (q*theta - p)/sqrt(1+theta^2)
across the vertical, stretched by e^t, and a component
(q + p*theta)/sqrt(1+theta^2) along it, shrunk by e^-t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .contfrac import Convergent, ValueEnclosure
from .errors import DomainError, InsufficientDepth, InsufficientPrecision
from .numerics import ctx, from_fraction, mpf

# systole bound for unit-area flat tori
HERMITE_BOUND = math.sqrt(2 / math.sqrt(3))

MAX_EVAL_WIDTH = Fraction(1, 10**30)
BALANCE_TOLERANCE = mpf("1e-9")


@dataclass(frozen=True)
class SlitSurface:
    s: float
    slopes: tuple[ValueEnclosure, ValueEnclosure, ValueEnclosure]

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError(f"slit length must lie in (0, 1), got {self.s}")
        if len(self.slopes) != 3:
            raise ValueError("need exactly three slopes")
        for enc in self.slopes:
            if enc.lower < 0 or enc.upper > 1:
                raise ValueError("slopes must lie in (0, 1)")

    def theta(self, torus: int):
        """Slope of ``torus`` at working precision (enclosure midpoint)."""
        enc = self.slopes[torus]
        if enc.width > MAX_EVAL_WIDTH:
            raise InsufficientPrecision(
                f"slope enclosure of torus {torus} has width {float(enc.width):.3g} > 1e-30"
            )
        return from_fraction(enc.midpoint)


@dataclass(frozen=True)
class TorusCurve:
    torus: int
    q: int
    p: int

    def __post_init__(self):
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"holonomy ({self.q}, {self.p}) is not primitive")

    @classmethod
    def from_convergent(cls, torus: int, c: Convergent) -> "TorusCurve":
        return cls(torus, c.q, c.p)


def components(surface: SlitSurface, curve: TorusCurve, t):
    """(across, along) flat components of ``curve`` at time t."""
    theta = surface.theta(curve.torus)
    norm = ctx.sqrt(1 + theta * theta)
    t = mpf(t)
    across = ctx.exp(t) * (curve.q * theta - curve.p) / norm
    along = ctx.exp(-t) * (curve.q + curve.p * theta) / norm
    return across, along


def flat_length(surface: SlitSurface, curve: TorusCurve, t):
    if t < 0:
        raise DomainError("the ray is parameterised by t >= 0")
    across, along = components(surface, curve, t)
    return ctx.sqrt(across * across + along * along)


def _balance_at(r: Fraction, q: int, p: int):
    num = p * r.numerator + q * r.denominator
    den = abs(q * r.numerator - p * r.denominator)
    if den == 0:
        raise InsufficientPrecision("enclosure endpoint coincides with the curve slope")
    return ctx.log(mpf(num) / mpf(den)) / 2


def balance_time_exact(surface: SlitSurface, curve: TorusCurve):
    """Time at which the two flat components of ``curve`` have equal length.

    Evaluated exactly at both ends of the slope enclosure; the value is
    monotone in theta away from p/q, so disagreement beyond 1e-9 means the
    enclosure is too wide.
    """
    enc = surface.slopes[curve.torus]
    if curve.q and enc.lower <= Fraction(curve.p, curve.q) <= enc.upper:
        raise InsufficientPrecision("slope enclosure contains the curve slope p/q")
    lo = _balance_at(enc.lower, curve.q, curve.p)
    hi = _balance_at(enc.upper, curve.q, curve.p)
    if abs(hi - lo) > BALANCE_TOLERANCE:
        raise InsufficientPrecision(
            f"balance time undetermined: endpoint values differ by {ctx.nstr(abs(hi - lo), 3)}"
        )
    return (lo + hi) / 2


def extremal_length_upper(surface: SlitSurface, curve: TorusCurve, t):
    theta = surface.theta(curve.torus)
    norm = ctx.sqrt(1 + theta * theta)
    denom = norm - mpf(surface.s) * abs(curve.q * theta - curve.p)
    assert denom > 0, "extremal-length prefactor denominator must be positive"
    return norm / denom * flat_length(surface, curve, t) ** 2


def boundary_length(surface_or_s, t):
    s = surface_or_s.s if isinstance(surface_or_s, SlitSurface) else surface_or_s
    return 2 * mpf(s) * ctx.exp(-mpf(t))


def slit_threshold(epsilon0: float, R0: float = 0.25) -> float:
    """Largest slit length keeping the boundary curve's extremal length <= epsilon0/e."""
    if epsilon0 <= 0 or R0 <= 0:
        raise DomainError("epsilon0 and R0 must be positive")
    return 2 * R0 * math.exp(-2 * math.pi * math.e / epsilon0)


def systole_candidate(
    surface: SlitSurface, torus: int, t, convs: Sequence[Convergent]
) -> TorusCurve:
    """Shorter of alpha(n), alpha(n+1) where T_n <= t <= T_{n+1}; ties go to alpha(n)."""
    t = mpf(t)
    curves = [TorusCurve.from_convergent(torus, c) for c in convs]
    prev = balance_time_exact(surface, curves[0])
    if t < prev:
        raise InsufficientDepth("t precedes the first balance time")
    for n in range(len(curves) - 1):
        try:
            nxt = balance_time_exact(surface, curves[n + 1])
        except InsufficientPrecision as exc:
            raise InsufficientDepth(f"balance time {n + 1} not determined") from exc
        if prev <= t <= nxt:
            a, b = curves[n], curves[n + 1]
            return a if flat_length(surface, a, t) <= flat_length(surface, b, t) else b
        prev = nxt
    raise InsufficientDepth("t lies beyond the computed balance times")
