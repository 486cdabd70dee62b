"""Synthesis of the three digit schedules from a target curve.

The loop is: a dense plan of curve samples with small consecutive steps, one
digit triple per plan point whose inverse log-growth rates are proportional
to the target, and block lengths chosen one block at a time so the coarse
balance times of the three tori interleave and every block is long enough
for the proportions to settle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .coarse import digit_for_log, error_budget, log_dominant_root
from .config import EpsilonRule, RunConfig
from .contfrac import Digit, ExpDigit
from .curves import TargetCurve
from .errors import DigitCapExceeded, DomainError, PlanInfeasible
from .flatsurf import slit_threshold
from .numerics import ceil_int, ctx, mpf, quantize, slack

HALF = mpf(1) / 2
MIN_BLOCK_LENGTH = 3
RESOLUTION_MESH = 0.01


# ---------------------------------------------------------------- dense plan


@dataclass(frozen=True)
class DensePlan:
    """Curve parameters t_1..t_K, their images, and eps_1..eps_{K+1}.

    Reals are kept as decimal strings; those strings are what every later
    check reads, so a reloaded plan is bit-for-bit the plan that was built.
    """

    params: tuple[str, ...]
    targets: tuple[tuple[str, str, str], ...]
    epsilons: tuple[str, ...]
    resolution: str

    @property
    def K(self) -> int:
        return len(self.params)

    def epsilon(self, j: int):
        return mpf(self.epsilons[j - 1])

    def target(self, j: int):
        return tuple(mpf(x) for x in self.targets[j - 1])

    def target_floats(self, j: int) -> tuple[float, float, float]:
        return tuple(float(x) for x in self.targets[j - 1])

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "targets": [list(t) for t in self.targets],
            "epsilons": list(self.epsilons),
            "resolution": self.resolution,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DensePlan":
        return cls(
            tuple(obj["params"]),
            tuple(tuple(t) for t in obj["targets"]),
            tuple(obj["epsilons"]),
            obj["resolution"],
        )


def _zigzag(periodic: bool):
    """Dyadic parameters visited by the plan, coarse levels first.

    Open curves are swept centre-out, alternating sides of 1/2 at each
    dyadic level; closed curves are swept round and round, one finer level
    per lap.
    """
    level, lap = 1, 0
    while True:
        if periodic:
            count = 2**level
            for i in range(1, count + 1):
                yield lap + i / count
            lap += 1
        else:
            for i in range(2 ** (level - 1)):
                offset = (2 * i + 1) / 2 ** (level + 1)
                yield 0.5 - offset
                yield 0.5 + offset
        level += 1


def plan_start(periodic: bool) -> float:
    return 0.0 if periodic else 0.5


def _as_strings(pt) -> tuple[str, str, str]:
    return tuple(repr(float(x)) for x in pt)


def _sup_gap(a, b):
    return max(abs(mpf(x) - mpf(y)) for x, y in zip(a, b))


def plan_resolution(curve: TargetCurve, targets, mesh: float = RESOLUTION_MESH) -> float:
    """Largest l1 distance from a curve sample to the nearest plan point."""
    pts = [tuple(float(x) for x in t) for t in targets]
    worst = 0.0
    for c in curve.samples(mesh):
        near = min(sum(abs(c[i] - p[i]) for i in range(3)) for p in pts)
        worst = max(worst, near)
    return worst


def build_dense_plan(
    curve: TargetCurve,
    K: int,
    epsilon_rule: EpsilonRule = EpsilonRule(),
    insertion_cap: int = 60,
) -> DensePlan:
    if K < 2:
        raise ValueError("K must be >= 2")
    epsilons = tuple(repr(float(epsilon_rule(j))) for j in range(1, K + 2))
    targets = _zigzag(curve.periodic)
    current = plan_start(curve.periodic)
    params = [current]
    points = [_as_strings(curve(current))]
    pending = next(targets)
    for j in range(2, K + 1):
        while pending == current:
            pending = next(targets)
        eps = mpf(epsilons[j - 1])
        cand = pending
        for _ in range(insertion_cap + 1):
            pt = _as_strings(curve(cand))
            if _sup_gap(pt, points[-1]) < eps:
                break
            cand = (cand + current) / 2
        else:
            raise PlanInfeasible(j, f"no parameter within {insertion_cap} bisections")
        params.append(cand)
        points.append(pt)
        current = cand
        if cand == pending:
            pending = next(targets)
    resolution = plan_resolution(curve, points)
    return DensePlan(
        tuple(repr(float(p)) for p in params), tuple(points), epsilons, repr(resolution)
    )


# ------------------------------------------------------------- digit choice


@dataclass(frozen=True)
class ThetaSchedule:
    """Digits theta_i(j) and the scale c_j each triple was generated from."""

    scales: tuple[str, ...]
    digits: tuple[tuple[Digit, ...], tuple[Digit, ...], tuple[Digit, ...]]

    @property
    def K(self) -> int:
        return len(self.scales)

    def digit(self, i: int, j: int) -> Digit:
        return self.digits[i][j - 1]

    def log_lambda(self, i: int, j: int):
        return log_dominant_root(self.digits[i][j - 1])


def floored_proxy(target, eps_next) -> list:
    """Target with every entry raised to eps_next/6, renormalised."""
    floor = mpf(eps_next) / 6
    raised = [max(mpf(g), floor) for g in target]
    total = sum(raised)
    return [g / total for g in raised]


def inverse_share(log_lambdas) -> list:
    """Barycentric vector proportional to 1/log lam."""
    inv = [1 / x for x in log_lambdas]
    total = sum(inv)
    return [x / total for x in inv]


def digit_for_target(log_target: str, digit_cap: int, exp_digits: bool) -> Digit:
    """Digit whose log-growth rate is ``log_target`` (a decimal string)."""
    value = mpf(log_target)
    required = int(value / ctx.ln10) + 1
    if required > digit_cap:
        if not exp_digits:
            raise DigitCapExceeded(required, digit_cap)
        return ExpDigit(log_target)
    return digit_for_log(value)


def digits_for_scale(proxy, c, digit_cap: int = 1000, exp_digits: bool = True) -> list:
    """One digit per torus with log-growth c * max(proxy) / proxy_i."""
    top = max(proxy)
    out = []
    for g in proxy:
        _, s = quantize(mpf(c) * top / g)
        out.append(digit_for_target(s, digit_cap, exp_digits))
    return out


@dataclass(frozen=True)
class _ScaleCheck:
    ok: bool
    reason: str = ""


def _check_scale(lams, prev_max, eps_j, eps_next, target, L) -> _ScaleCheck:
    if min(lams) < 4 * L:
        return _ScaleCheck(False, "growth below 4L")
    if prev_max is not None and prev_max / min(lams) >= eps_j:
        return _ScaleCheck(False, "previous block too fast")
    share = inverse_share(lams)
    if max(abs(a - mpf(g)) for a, g in zip(share, target)) >= eps_next:
        return _ScaleCheck(False, "proportions off target")
    return _ScaleCheck(True)


def select_thetas(
    plan: DensePlan,
    L,
    digit_cap: int = 1000,
    exp_digits: bool = True,
    max_doublings: int = 4000,
) -> ThetaSchedule:
    if digit_cap < 1:
        raise ValueError("digit_cap must be positive")
    L = mpf(L)
    scales: list[str] = []
    digits: list[list[Digit]] = [[], [], []]
    prev_max = None
    for j in range(1, plan.K + 1):
        target = plan.target(j)
        eps_j, eps_next = plan.epsilon(j), plan.epsilon(j + 1)
        proxy = floored_proxy(target, eps_next)
        c = 4 * L
        for _ in range(max_doublings):
            c, c_str = quantize(c)
            row = digits_for_scale(proxy, c, digit_cap, exp_digits)
            lams = [log_dominant_root(d) for d in row]
            if _check_scale(lams, prev_max, eps_j, eps_next, target, L).ok:
                break
            c = 2 * c
        else:
            raise AssertionError(f"no admissible scale for block {j}")
        scales.append(c_str)
        for i in range(3):
            digits[i].append(row[i])
        prev_max = max(lams)
    return ThetaSchedule(tuple(scales), tuple(tuple(d) for d in digits))


# ------------------------------------------------------------ block lengths


@dataclass
class CoarseState:
    """Per-torus coarse bookkeeping, filled one block at a time."""

    log_lambda: list  # [i][j-1] for every planned block
    lengths: list = field(default_factory=lambda: [[], [], []])
    log_q: list = field(default_factory=lambda: [[mpf(0)], [mpf(0)], [mpf(0)]])
    starts: list = field(default_factory=lambda: [[0], [0], [0]])

    @classmethod
    def from_thetas(cls, thetas: ThetaSchedule) -> "CoarseState":
        lams = [[thetas.log_lambda(i, j) for j in range(1, thetas.K + 1)] for i in range(3)]
        return cls(lams)

    @property
    def blocks_done(self) -> int:
        return len(self.lengths[0])

    def lam(self, i: int, j: int):
        return self.log_lambda[i][j - 1]

    def has_block(self, j: int) -> bool:
        return j <= len(self.log_lambda[0])

    def push(self, lengths) -> None:
        k = self.blocks_done + 1
        for i, n in enumerate(lengths):
            self.lengths[i].append(n)
            self.log_q[i].append(self.log_q[i][-1] + n * self.lam(i, k))
            self.starts[i].append(self.starts[i][-1] + n)


def smallest_tail(pred: Callable[[int], bool], guess: int, lo: int) -> int:
    """Smallest n >= lo with pred(n), for pred false-then-true on [lo, inf)."""
    n = max(int(guess), lo)
    if pred(n):
        if n == lo or not pred(n - 1):
            return n
        hi, step = n - 1, 2
        while True:
            cand = max(lo, hi - step)
            if not pred(cand):
                bad = cand
                break
            if cand == lo:
                return lo
            hi, step = cand, step * 2
    else:
        bad, step = n, 1
        while True:
            cand = bad + step
            if pred(cand):
                hi = cand
                break
            bad, step = cand, step * 2
    while hi - bad > 1:
        mid = (hi + bad) // 2
        if pred(mid):
            hi = mid
        else:
            bad = mid
    return hi


def log_linear_tail(alpha, beta, gamma, eps, lo: int) -> int:
    """Smallest N >= lo with log(alpha + beta n) < eps (gamma + n) for all n >= N.

    The gap is concave in n, so failures form an interval; its right end is
    the -1 branch of Lambert W.
    """
    alpha, beta, gamma, eps = mpf(alpha), mpf(beta), mpf(gamma), mpf(eps)
    floor = max(lo, int(ctx.floor(-alpha / beta)) + 1, int(ctx.floor(-gamma)) + 1)

    def ok(n: int) -> bool:
        return ctx.log(alpha + beta * n) < eps * (gamma + n)

    kappa = eps / beta
    arg = -kappa * ctx.exp(eps * (gamma - alpha / beta))
    if arg < -1 / ctx.e:
        return floor
    u = -ctx.lambertw(arg, -1).real / kappa
    root = (u - alpha) / beta
    peak = 1 / eps - alpha / beta
    start = max(floor, ceil_int(peak))
    return smallest_tail(ok, ceil_int(root), start)


@dataclass(frozen=True)
class GrowthBound:
    N: int
    parts: dict  # constraint name -> smallest admissible n
    H: dict  # "i,l" -> H_{i,l}(k+1)


def h_constant(log_q_prev, lam_i_next, lam_l_next, L):
    """H_{i,l}(k+1): the additive offset in the lower distance estimate one block on."""
    return mpf(5) / 2 + (log_q_prev + 3 * L + mpf(5) / 2 * lam_l_next) / lam_i_next


def growth_lower_bound(
    k: int, state: CoarseState, eps_next, R, L, closeness=0.25
) -> GrowthBound:
    """Smallest common length N for block k making every settling inequality hold.

    For each torus i, with a = N_i(k-1), b = log q_i(k-1), lam = log lam_i(k):

    * the upper distance-rate estimate (a+n+R)/(b+(n-5/2)lam-L) and the lower one
      (a+n-2H-2R)/(b+(n-1/2)lam+L) lie within relative ``closeness*eps_next``
      of 1/lam;
    * the horoball-to-curve-graph ratios log(time)/distance stay below eps_next
      at the end of block k, and below eps_next/2 inside block k+1.
    """
    eps_next, R, L, closeness = mpf(eps_next), mpf(R), mpf(L), mpf(closeness)
    tol = closeness * eps_next
    has_next = state.has_block(k + 1)
    parts: dict = {}
    H: dict = {}
    for i in range(3):
        a = state.starts[i][k - 1]
        b = state.log_q[i][k - 1]
        lam = state.lam(i, k)

        c_up = lam * (a + R) - b + mpf(5) / 2 * lam + L

        def up_ok(n, c_up=c_up, b=b, lam=lam):
            den = b + (n - mpf(5) / 2) * lam - L
            return den > 0 and abs(c_up) <= tol * den

        guess = ceil_int(mpf(5) / 2 + (abs(c_up) / tol - b + L) / lam)
        parts[f"rate-upper:{i}"] = smallest_tail(up_ok, guess, 1)

        parts[f"horoball-end:{i}"] = log_linear_tail(
            b - lam / 2 + L, lam, a - 2, eps_next, MIN_BLOCK_LENGTH
        )

        if not has_next:
            continue
        lam_next = state.lam(i, k + 1)
        for ell in range(3):
            h = h_constant(b, lam_next, state.lam(ell, k + 1), L)
            H[f"{i},{ell}"] = h
            c_low = lam * (a - 2 * h - 2 * R) - b + lam / 2 - L

            def low_ok(n, c_low=c_low, h=h, a=a, b=b, lam=lam):
                den = b + (n - HALF) * lam + L
                return a + n - 2 * h - 2 * R > 0 and den > 0 and abs(c_low) <= tol * den

            guess = max(
                ceil_int(HALF + (abs(c_low) / tol - b - L) / lam),
                ceil_int(2 * h + 2 * R - a),
            )
            parts[f"rate-lower:{i},{ell}"] = smallest_tail(low_ok, guess, 1)

        parts[f"horoball-next:{i}"] = log_linear_tail(
            b + lam_next / 2 + L, lam, a, eps_next / 2, MIN_BLOCK_LENGTH
        )

        def jump_ok(n, b=b, lam=lam, lam_next=lam_next):
            return lam_next < eps_next / 2 * (b + n * lam + lam_next / 2 + L)

        guess = ceil_int((2 * lam_next / eps_next - b - lam_next / 2 - L) / lam)
        parts[f"horoball-jump:{i}"] = smallest_tail(jump_ok, guess, 1)

    N = max([MIN_BLOCK_LENGTH, *parts.values()])
    return GrowthBound(N, parts, H)


def min_partner_length(n0: int, i: int, k: int, state: CoarseState, L) -> int:
    """Smallest l with log q^0 + (n0-1/2)lam_0 + L <= log q^i + (l-1/2)lam_i - L, rounded up."""
    b0, bi = state.log_q[0][k - 1], state.log_q[i][k - 1]
    lam0, lami = state.lam(0, k), state.lam(i, k)
    x = (b0 - bi + (n0 - HALF) * lam0 + 2 * mpf(L)) / lami + HALF
    return ceil_int(x + slack(x))


def choose_block_lengths(k: int, N: int, state: CoarseState, L) -> tuple[int, int, int]:
    lo = max(N, MIN_BLOCK_LENGTH)

    def ok(n0: int) -> bool:
        return all(min_partner_length(n0, i, k, state, L) >= N for i in (1, 2))

    b0, lam0 = state.log_q[0][k - 1], state.lam(0, k)
    guess = lo
    for i in (1, 2):
        bi, lami = state.log_q[i][k - 1], state.lam(i, k)
        x = ((N - mpf(3) / 2) * lami - b0 + bi - 2 * mpf(L)) / lam0 + HALF
        guess = max(guess, ceil_int(x))
    n0 = smallest_tail(ok, guess, lo)
    return (n0, min_partner_length(n0, 1, k, state, L), min_partner_length(n0, 2, k, state, L))


# ----------------------------------------------------------------- driver


@dataclass(frozen=True)
class Construction:
    """Raw synthesis output, before packaging into a certificate."""

    plan: DensePlan
    thetas: ThetaSchedule
    lengths: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    growth: tuple[GrowthBound, ...]


def construct(curve: TargetCurve, K: int, config: RunConfig) -> Construction:
    L = error_budget().L
    plan = build_dense_plan(curve, K, config.epsilon_rule, config.insertion_cap)
    thetas = select_thetas(plan, L, config.digit_cap, config.exp_digits)
    state = CoarseState.from_thetas(thetas)
    growth = []
    for k in range(1, K + 1):
        bound = growth_lower_bound(k, state, plan.epsilon(k + 1), config.R, L, config.closeness)
        state.push(choose_block_lengths(k, bound.N, state, L))
        growth.append(bound)
    lengths = tuple(tuple(state.lengths[i]) for i in range(3))
    return Construction(plan, thetas, lengths, tuple(growth))


def synthesize(curve: TargetCurve, K: Optional[int] = None, config: Optional[RunConfig] = None):
    """Run the full construction and return an audited certificate.

    Raises if any audit entry fails; a failing certificate is never returned.
    """
    from .certificate import ConstructionCertificate, compute_audit

    config = config or RunConfig()
    K = config.K if K is None else K
    if config.slit > slit_threshold(config.epsilon0, config.r0):
        raise DomainError(
            f"slit length {config.slit} exceeds the threshold "
            f"{slit_threshold(config.epsilon0, config.r0):.6g}"
        )
    built = construct(curve, K, config)
    cert = ConstructionCertificate.from_construction(built, curve, config)
    audit = compute_audit(cert)
    failed = [e for e in audit if not e.passed]
    if failed:
        raise AssertionError(f"audit failed: {failed[0]}")
    return cert.with_audit(audit)


__all__ = [
    "DensePlan",
    "ThetaSchedule",
    "CoarseState",
    "GrowthBound",
    "build_dense_plan",
    "select_thetas",
    "growth_lower_bound",
    "choose_block_lengths",
    "synthesize",
]
