"""Log-space growth engine for denominators and balance times.

Inside a block of constant digit x the denominators satisfy
q_{N+l} = A lam(x)^l + B lam_bar(x)^l, so log q grows linearly in l with slope
log lam(x) up to an explicit additive error.  Everything here works on the
natural-log scale with mpf values from :mod:`teichlimit.numerics`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from . import contfrac
from .contfrac import CFSchedule, Digit, ExpDigit
from .errors import ContractViolation, DomainError, NotExplicit
from .numerics import ctx, mpf

KINDS = ("log_denominator", "balance_time", "generic")


@dataclass(frozen=True)
class LogQuantity:
    value: object
    kind: str = "generic"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        v = mpf(self.value)
        if not ctx.isfinite(v):
            raise ValueError("LogQuantity must be finite")
        if self.kind == "log_denominator" and v < 0:
            raise ValueError("log denominators are non-negative")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return float(self.value)


def dominant_root(x):
    """Larger root of y^2 = x y + 1."""
    x = mpf(x)
    if x < 2:
        raise DomainError(f"digit must be >= 2, got {x}")
    return (x + ctx.sqrt(x * x + 4)) / 2


def conjugate_root(x):
    """Smaller root of y^2 = x y + 1; lies in (-1, 0) for x >= 2."""
    x = mpf(x)
    if x < 2:
        raise DomainError(f"digit must be >= 2, got {x}")
    return (x - ctx.sqrt(x * x + 4)) / 2


@lru_cache(maxsize=8192)
def log_dominant_root(d: Digit):
    """log lam(d), also defined for digits stored in exponential form."""
    if isinstance(d, ExpDigit):
        return mpf(d.log_lambda)
    if d < 2:
        raise DomainError(f"digit must be >= 2, got {d}")
    # log((x + sqrt(x^2+4))/2) == asinh(x/2), without cancellation
    return ctx.asinh(mpf(d) / 2)


def digit_for_log(log_lambda):
    """Largest digit whose dominant root does not exceed exp(log_lambda)."""
    log_lambda = mpf(log_lambda)
    digits_needed = int(log_lambda / ctx.ln10) + 30
    with ctx.workdps(max(ctx.dps, digits_needed)):
        d = int(ctx.floor(2 * ctx.sinh(log_lambda)))
        # sinh(asinh(x)) may land just below an integer x
        if ctx.asinh(mpf(d + 1) / 2) <= log_lambda:
            d += 1
    return d


@dataclass(frozen=True)
class GrowthModel:
    lambda_val: object
    lambda_bar_val: object
    A: object
    B: object
    block_index: int

    def denominator(self, ell: int):
        """Closed-form q_{N(j-1)+ell}."""
        return self.A * self.lambda_val**ell + self.B * self.lambda_bar_val**ell


def growth_model(schedule: CFSchedule, j: int) -> GrowthModel:
    """Closed-form solution of the denominator recurrence inside block j."""
    starts = schedule.block_starts()
    x = schedule.digit(j)
    if isinstance(x, ExpDigit):
        raise NotExplicit("growth model needs an explicit digit")
    convs = contfrac.convergents(schedule, starts[j - 1] + 1)
    q0 = convs[starts[j - 1]].q
    q1 = convs[starts[j - 1] + 1].q
    lam, lam_bar = dominant_root(x), conjugate_root(x)
    A = (q1 - lam_bar * q0) / (lam - lam_bar)
    B = (q0 * lam - q1) / (lam - lam_bar)
    return GrowthModel(lam, lam_bar, A, B, j)


@dataclass(frozen=True)
class ErrorBudget:
    L: object
    terms: dict = field(default_factory=dict)

    def as_strings(self, digits: int = 40) -> dict:
        return {k: ctx.nstr(v, digits) for k, v in self.terms.items()}


def error_budget() -> ErrorBudget:
    """Explicit additive error for the coarse log q and balance-time estimates.

    geometric_tail bounds the lam_bar^l correction, a_vs_q the gap between
    log A(j) and log q_{N(j-1)}, and t_vs_half_log the gap between T_n and
    (log q_n + log q_{n+1}) / 2.
    """
    terms = {
        "geometric_tail": abs(ctx.log(1 + 2 * conjugate_root(2))),
        "a_vs_q": ctx.log(4),
        "t_vs_half_log": ctx.log(2),
    }
    return ErrorBudget(sum(terms.values()), terms)


def _base(base_log_q) -> object:
    return base_log_q.value if isinstance(base_log_q, LogQuantity) else mpf(base_log_q)


def coarse_log_q(schedule: CFSchedule, j: int, ell: int, base_log_q) -> LogQuantity:
    """Coarse log q_{N(j-1)+ell} given log q_{N(j-1)}."""
    if j < 1 or j > len(schedule.blocks):
        raise ContractViolation(f"block index {j} out of range")
    if not 0 <= ell <= schedule.run_length(j):
        raise ContractViolation(f"ell={ell} outside [0, {schedule.run_length(j)}]")
    value = _base(base_log_q) + ell * log_dominant_root(schedule.digit(j))
    return LogQuantity(value, "log_denominator")


def coarse_balance_time(schedule: CFSchedule, j: int, ell: int, base_log_q) -> LogQuantity:
    """Coarse T_{N(j-1)+ell}; the last index of a block has no in-block successor."""
    if j < 1 or j > len(schedule.blocks):
        raise ContractViolation(f"block index {j} out of range")
    if not 0 <= ell <= schedule.run_length(j) - 1:
        raise ContractViolation(f"ell={ell} outside [0, {schedule.run_length(j) - 1}]")
    value = _base(base_log_q) + (ell + mpf(1) / 2) * log_dominant_root(schedule.digit(j))
    return LogQuantity(value, "balance_time")


def coarse_T_from_pair(log_q_n: LogQuantity, log_q_next: LogQuantity) -> LogQuantity:
    """Half the log of q_n q_{n+1}; the true balance time exceeds it by at most log 2."""
    return LogQuantity((_base(log_q_n) + _base(log_q_next)) / 2, "balance_time")


def block_log_q(schedule: CFSchedule) -> list:
    """Coarse log q_{N(j)} for j = 0..#blocks, threaded from log q_0 = 0."""
    out = [mpf(0)]
    for d, n in schedule.blocks:
        out.append(out[-1] + n * log_dominant_root(d))
    return out
