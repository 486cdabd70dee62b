"""Target curves in the standard 2-simplex and their JSON descriptions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .errors import CurveSpecError

SUM_TOL = 1e-12

Point = tuple[float, float, float]


def _check_point(pt, where: str) -> Point:
    if len(pt) != 3:
        raise CurveSpecError(f"{where}: expected 3 barycentric entries, got {len(pt)}")
    vals = []
    for k, v in enumerate(pt):
        try:
            vals.append(float(Fraction(str(v))))
        except (ValueError, ZeroDivisionError) as exc:
            raise CurveSpecError(f"{where}[{k}]: not a decimal number: {v!r}") from exc
    if min(vals) < 0:
        raise CurveSpecError(f"{where}: negative barycentric entry {vals}")
    if abs(sum(vals) - 1) > SUM_TOL:
        raise CurveSpecError(f"{where}: entries sum to {sum(vals)!r}, not 1")
    return tuple(vals)


@dataclass(frozen=True)
class TargetCurve:
    """A continuous map [0, 1] -> simplex (periodic curves wrap around)."""

    spec: dict
    sampler: Callable[[float], Point]
    lipschitz: float
    periodic: bool

    def __call__(self, s: float) -> Point:
        if self.periodic:
            s = s % 1.0
        else:
            s = min(max(s, 0.0), 1.0)
        return self.sampler(s)

    def samples(self, mesh: float) -> list[Point]:
        """Points along the curve with consecutive l1 gaps at most ``mesh``."""
        # l1 speed <= 2 * sup-norm speed on the simplex
        count = max(1, math.ceil(2 * self.lipschitz / mesh)) if self.lipschitz > 0 else 1
        return [self(i / count) for i in range(count + (0 if self.periodic else 1))]


def polyline(points, closed: bool = False) -> TargetCurve:
    pts = [_check_point(p, f"points[{k}]") for k, p in enumerate(points)]
    if not pts:
        raise CurveSpecError("polyline needs at least one point")
    spec = {"type": "polyline", "points": [list(map(repr, p)) for p in pts], "closed": closed}
    path = pts + [pts[0]] if closed and len(pts) > 1 else pts
    nseg = len(path) - 1
    if nseg == 0:
        p0 = pts[0]
        return TargetCurve(spec, lambda s: p0, 0.0, False)

    def sampler(s: float) -> Point:
        x = s * nseg
        k = min(int(x), nseg - 1)
        u = x - k
        a, b = path[k], path[k + 1]
        return tuple((1 - u) * a[i] + u * b[i] for i in range(3))

    lip = nseg * max(max(abs(a[i] - b[i]) for i in range(3)) for a, b in zip(path, path[1:]))
    return TargetCurve(spec, sampler, lip, closed)


_U = (1 / math.sqrt(2), -1 / math.sqrt(2), 0.0)
_V = (1 / math.sqrt(6), 1 / math.sqrt(6), -2 / math.sqrt(6))


def circle_in_simplex(center=(1 / 3, 1 / 3, 1 / 3), radius: float = 0.2) -> TargetCurve:
    c = _check_point(center, "params.center")
    # largest coefficient magnitude of the in-plane basis is 2/sqrt(6)
    if min(c) - radius * 2 / math.sqrt(6) < 0:
        raise CurveSpecError("params: circle leaves the simplex")
    spec = {
        "type": "parametric",
        "name": "circle-in-simplex",
        "params": {"center": list(map(repr, c)), "radius": repr(float(radius))},
    }

    def sampler(s: float) -> Point:
        a = 2 * math.pi * s
        ca, sa = math.cos(a), math.sin(a)
        pt = [c[i] + radius * (ca * _U[i] + sa * _V[i]) for i in range(3)]
        pt[2] = 1.0 - pt[0] - pt[1]
        return tuple(max(x, 0.0) for x in pt)

    return TargetCurve(spec, sampler, 2 * math.pi * radius * 2 / math.sqrt(6), True)


def curve_from_spec(spec: dict) -> TargetCurve:
    if not isinstance(spec, dict) or "type" not in spec:
        raise CurveSpecError("curve spec must be an object with a 'type' field")
    kind = spec["type"]
    if kind == "polyline":
        if "points" not in spec:
            raise CurveSpecError("polyline: missing 'points'")
        return polyline(spec["points"], bool(spec.get("closed", False)))
    if kind == "parametric":
        name = spec.get("name")
        params = spec.get("params", {})
        if name == "circle-in-simplex":
            kw = {}
            if "center" in params:
                kw["center"] = params["center"]
            if "radius" in params:
                try:
                    kw["radius"] = float(params["radius"])
                except ValueError as exc:
                    raise CurveSpecError(f"params.radius: {params['radius']!r}") from exc
            return circle_in_simplex(**kw)
        raise CurveSpecError(f"unknown parametric family {name!r}")
    raise CurveSpecError(f"unknown curve type {kind!r}")


def load_curve(path) -> TargetCurve:
    text = Path(path).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveSpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return curve_from_spec(spec)


def constant(point) -> TargetCurve:
    return polyline([point])


def segment(a, b) -> TargetCurve:
    return polyline([a, b])


def l1(a, b) -> float:
    return sum(abs(float(x) - float(y)) for x, y in zip(a, b))


def sup_dist(a, b) -> float:
    return max(abs(float(x) - float(y)) for x, y in zip(a, b))
