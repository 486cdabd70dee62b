"""Barycentric trajectory of the three curve-graph distance proxies.

The proxy for torus i at time t is the index n with T_{n-1} < t <= T_n on the
coarse balance-time scale.  Within a block the coarse times form an
arithmetic progression, so lookup is a search over blocks plus a ceiling.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property

from .certificate import ConstructionCertificate
from .errors import DomainError, HorizonExceeded
from .numerics import ceil_int, ctx, mpf, to_str

HALF = mpf(1) / 2
TRACKING_FACTOR = 11


class Timeline:
    """Coarse balance times of the three tori of one certificate."""

    def __init__(self, cert: ConstructionCertificate):
        self.cert = cert
        self.K = cert.K
        self.starts = cert.starts
        self.log_q = cert.log_q
        self.lam = [[cert.log_lambda(i, j) for j in range(1, self.K + 1)] for i in range(3)]

    @cached_property
    def block_ends(self) -> list[list]:
        """T_{N(j)-1} for each torus and block j = 1..K."""
        return [
            [self.time(i, self.starts[i][j] - 1) for j in range(1, self.K + 1)]
            for i in range(3)
        ]

    @property
    def horizon(self):
        return self.block_ends[0][-1]

    def time(self, i: int, n: int):
        """Coarse T^i_n for 0 <= n < N_i(K)."""
        if not 0 <= n < self.starts[i][-1]:
            raise HorizonExceeded(f"index {n} outside the certificate's {self.K} blocks")
        j = bisect_right(self.starts[i], n)
        offset = n - self.starts[i][j - 1]
        return self.log_q[i][j - 1] + (offset + HALF) * self.lam[i][j - 1]

    def distance(self, i: int, t) -> int:
        """Index n >= 1 with T_{n-1} < t <= T_n."""
        t = mpf(t)
        ends = self.block_ends[i]
        if t > ends[-1]:
            raise HorizonExceeded("t lies beyond the last synthesized block")
        lo, hi = 0, len(ends) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ends[mid] >= t:
                hi = mid
            else:
                lo = mid + 1
        j = lo + 1
        base, lam = self.log_q[i][j - 1], self.lam[i][j - 1]
        ell = max(0, ceil_int((t - base) / lam - HALF))
        start = self.starts[i][j - 1]
        # settle rounding so that t == T_m maps to m exactly
        while ell > 0 and self.time(i, start + ell - 1) >= t:
            ell -= 1
        while self.time(i, start + ell) < t:
            ell += 1
        return max(1, start + ell)

    def distances(self, t) -> tuple[int, int, int]:
        return tuple(self.distance(i, t) for i in range(3))

    def window(self, k: int):
        """[T^0_{N_0(k-1)-1}, T^0_{N_0(k)-1}), the stretch tracked against gamma(t_k)."""
        if not 2 <= k <= self.K:
            raise ValueError(f"windows exist for 2 <= k <= {self.K}")
        return self.block_ends[0][k - 2], self.block_ends[0][k - 1]

    def grid(self, k: int, density: int = 10) -> list:
        a, b = self.window(k)
        return [a + (b - a) * g / density for g in range(density)]


def _timeline(cert_or_timeline) -> Timeline:
    if isinstance(cert_or_timeline, Timeline):
        return cert_or_timeline
    return Timeline(cert_or_timeline)


def curve_graph_distance(cert, i: int, t) -> int:
    return _timeline(cert).distance(i, t)


def normalize(d) -> tuple:
    total = sum(d)
    return tuple(mpf(x) / total for x in d)


def phi(cert, t) -> tuple:
    return normalize(_timeline(cert).distances(t))


def horoball_distance_upper(cert, i: int, t):
    t = mpf(t)
    if t < 1:
        raise DomainError("the horoball estimate needs t >= 1")
    tl = _timeline(cert)
    h = tl.cert.horoball
    return mpf(h["scale"]) * ctx.log(t) + mpf(h["offset"])


def horoball_ratio(cert, i: int, t):
    tl = _timeline(cert)
    return horoball_distance_upper(tl, i, t) / tl.distance(i, t)


@dataclass(frozen=True)
class Checkpoint:
    k: int
    t: object
    indices: tuple[int, int, int]
    m: tuple[int, int, int]
    phi: tuple
    target: tuple
    bound: object

    @property
    def deviation(self):
        return max(abs(p - g) for p, g in zip(self.phi, self.target))

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound

    @property
    def branch(self) -> tuple[str, str, str]:
        """Which case of the distance estimate applies to each torus."""
        return tuple("m>=1" if m >= 1 else "m<=0" for m in self.m)


def checkpoints(cert, k: int, density: int = 10) -> list[Checkpoint]:
    tl = _timeline(cert)
    target = tl.cert.plan.target(k)
    bound = TRACKING_FACTOR * tl.cert.epsilon(k)
    out = []
    for t in tl.grid(k, density):
        d = tl.distances(t)
        m = tuple(d[i] - tl.starts[i][k - 1] for i in range(3))
        out.append(Checkpoint(k, t, d, m, normalize(d), target, bound))
    return out


def checkpoint_series(cert, density: int = 10) -> list[Checkpoint]:
    tl = _timeline(cert)
    return [c for k in range(2, tl.K + 1) for c in checkpoints(tl, k, density)]


CSV_COLUMNS = [
    "k", "t", "n_0", "n_1", "n_2", "phi_0", "phi_1", "phi_2",
    "gamma_0", "gamma_1", "gamma_2", "bound", "pass",
]


def checkpoint_table(series) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in series:
        w.writerow(
            [c.k, to_str(c.t, 30), *c.indices, *(to_str(x, 17) for x in c.phi),
             *(to_str(x, 17) for x in c.target), to_str(c.bound, 17), str(c.passed).lower()]
        )
    return buf.getvalue()


def simplex_xy(b) -> tuple[float, float]:
    """Planar coordinates of a barycentric triple (vertices at (0,0), (1,0), (1/2, sqrt3/2))."""
    b1, b2 = float(b[1]), float(b[2])
    return b1 + b2 / 2, math.sqrt(3) / 2 * b2


def plot_data(cert, series, curve=None, mesh: float = 0.05) -> dict:
    data = {
        "vertices": [list(simplex_xy(v)) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))],
        "trajectory": [
            {"k": str(c.k), "xy": [repr(x) for x in simplex_xy(c.phi)]} for c in series
        ],
        "plan": [
            [repr(x) for x in simplex_xy(cert.plan.target_floats(j))]
            for j in range(1, cert.K + 1)
        ],
    }
    if curve is not None:
        data["curve"] = [[repr(x) for x in simplex_xy(p)] for p in curve.samples(mesh)]
    return data
