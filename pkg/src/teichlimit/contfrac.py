"""Exact continued-fraction engine.

Schedules are run-length encoded: ``[0; 2, 2, 2, 5, 5]`` is
``CFSchedule(blocks=((2, 3), (5, 2)))``.  Convergents use the standard
three-term recurrence with integer arithmetic only, and the irrational value
is only ever handled as a rational enclosure between consecutive convergents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .errors import (
    ContractViolation,
    DepthCapExceeded,
    InsufficientDepth,
    NotExplicit,
)

DEFAULT_DEPTH_CAP = 10**6


@dataclass(frozen=True)
class ExpDigit:
    """A partial quotient too large to write out.

    It stands for the integer part of ``2*sinh(log_lambda)``, i.e. the digit
    whose dominant root is ``exp(log_lambda)`` up to a relative error below
    ``exp(-log_lambda)``.  ``log_lambda`` is kept as a decimal string.
    """

    log_lambda: str

    def __post_init__(self):
        if not float(self.log_lambda) > 1:
            raise ValueError(f"ExpDigit log_lambda must exceed 1, got {self.log_lambda}")

    def __str__(self):
        return f"exp:{self.log_lambda}"


Digit = Union[int, ExpDigit]


def digit_to_str(d: Digit) -> str:
    return str(d)


def digit_from_str(s: str) -> Digit:
    s = s.strip()
    if s.startswith("exp:"):
        return ExpDigit(s[4:])
    return int(s)


@dataclass(frozen=True)
class CFSchedule:
    blocks: tuple[tuple[Digit, int], ...]
    a0: int = 0

    def __post_init__(self):
        if self.a0 < 0:
            raise ValueError("a0 must be non-negative")
        blocks = tuple((d, int(n)) for d, n in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for d, n in blocks:
            if isinstance(d, int) and d < 2:
                raise ValueError(f"every digit must be >= 2, got {d}")
            if n < 1:
                raise ValueError(f"every run length must be >= 1, got {n}")

    @classmethod
    def from_digits(cls, digits: Sequence[int], a0: int = 0) -> "CFSchedule":
        blocks: list[list] = []
        for d in digits:
            if blocks and blocks[-1][0] == d:
                blocks[-1][1] += 1
            else:
                blocks.append([d, 1])
        return cls(tuple((d, n) for d, n in blocks), a0)

    @classmethod
    def repeated(cls, digit: Digit, count: int) -> "CFSchedule":
        return cls(((digit, count),))

    @property
    def depth(self) -> int:
        """Total number of partial quotients after a0."""
        return sum(n for _, n in self.blocks)

    def block_starts(self) -> list[int]:
        """N(0), N(1), ..., N(#blocks)."""
        out = [0]
        for _, n in self.blocks:
            out.append(out[-1] + n)
        return out

    def digit(self, j: int) -> Digit:
        """Digit of block j (1-based)."""
        return self.blocks[j - 1][0]

    def run_length(self, j: int) -> int:
        return self.blocks[j - 1][1]

    def iter_digits(self, limit: int) -> Iterator[int]:
        """a_1, a_2, ... up to ``limit`` terms; refuses non-explicit digits."""
        emitted = 0
        for d, n in self.blocks:
            if emitted >= limit:
                return
            if not isinstance(d, int):
                raise NotExplicit(f"digit {d} has no explicit integer form")
            take = min(n, limit - emitted)
            for _ in range(take):
                yield d
            emitted += take

    def to_json(self) -> dict:
        return {
            "a0": str(self.a0),
            "blocks": [[digit_to_str(d), str(n)] for d, n in self.blocks],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CFSchedule":
        return cls(
            tuple((digit_from_str(d), int(n)) for d, n in obj["blocks"]),
            int(obj.get("a0", "0")),
        )

    def extended(self, digit: Digit, count: int) -> "CFSchedule":
        """Copy with one more block appended (merged if the digit repeats)."""
        if self.blocks and self.blocks[-1][0] == digit:
            blocks = self.blocks[:-1] + ((digit, self.blocks[-1][1] + count),)
        else:
            blocks = self.blocks + ((digit, count),)
        return CFSchedule(blocks, self.a0)


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


SEEDS = (Convergent(-2, 0, 1), Convergent(-1, 1, 0))


def convergents(
    schedule: CFSchedule, max_index: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> list[Convergent]:
    """Convergents 0..max_index of ``schedule``."""
    if max_index < 0:
        raise ContractViolation("max_index must be >= 0")
    if max_index > depth_cap:
        raise DepthCapExceeded(max_index, depth_cap)
    if schedule.depth < max_index:
        raise InsufficientDepth(
            f"schedule has {schedule.depth} digits, need {max_index} for index {max_index}"
        )
    p2, p1 = 0, 1
    q2, q1 = 1, 0
    out = []
    digits = schedule.iter_digits(max_index)
    for n in range(max_index + 1):
        a = schedule.a0 if n == 0 else next(digits)
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append(Convergent(n, p1, q1))
    return out


def check_unimodular(c_n: Convergent, c_next: Convergent) -> bool:
    if c_next.index != c_n.index + 1:
        raise ContractViolation(
            f"convergent indices must be consecutive, got {c_n.index} and {c_next.index}"
        )
    return abs(c_n.p * c_next.q - c_n.q * c_next.p) == 1


@dataclass(frozen=True)
class ValueEnclosure:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("enclosure must satisfy lower < upper")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, x: Fraction) -> bool:
        return self.lower < x < self.upper

    @classmethod
    def from_convergents(cls, c_n: Convergent, c_next: Convergent) -> "ValueEnclosure":
        a, b = c_n.value, c_next.value
        return cls(min(a, b), max(a, b))


def value_enclosure(
    schedule: CFSchedule, depth: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> ValueEnclosure:
    """Interval between convergents ``depth`` and ``depth + 1``."""
    if depth < 1:
        raise ContractViolation("depth must be >= 1")
    convs = convergents(schedule, depth + 1, depth_cap)
    return ValueEnclosure.from_convergents(convs[depth], convs[depth + 1])


def deepest_enclosure(convs: Sequence[Convergent]) -> ValueEnclosure:
    if len(convs) < 3:
        raise InsufficientDepth("need at least convergents 0..2 for an enclosure")
    return ValueEnclosure.from_convergents(convs[-2], convs[-1])


def approximation_bounds_hold(
    convs: Sequence[Convergent], n: int, enclosure: ValueEnclosure, a0: int = 0
) -> bool:
    """Two-sided approximation bounds at index n against every point of ``enclosure``.

    Checks 1/(q_n + q_{n+1}) <= |p_n - theta q_n| <= 1/q_{n+1} and
    a0 <= p_n/q_n, theta <= a0 + 1.  ``|p_n - theta q_n|`` is affine in theta on
    the enclosure, so the endpoints are the worst cases.
    """
    c, c1 = convs[n], convs[n + 1]
    # cross-multiplied integer comparisons; same answer as Fraction, no gcds
    for x in (enclosure.lower, enclosure.upper):
        num, den = x.numerator, x.denominator
        gap = abs(c.p * den - num * c.q)  # |p_n - x q_n| * den
        if gap * (c.q + c1.q) < den or gap * c1.q > den:
            return False
        if not a0 * den <= num <= (a0 + 1) * den:
            return False
    return a0 * c.q <= c.p <= (a0 + 1) * c.q


def check_approximation_bounds(
    schedule: CFSchedule, n: int, depth_cap: int = DEFAULT_DEPTH_CAP
) -> bool:
    if n < 0:
        raise ContractViolation("n must be >= 0")
    depth = schedule.depth - 1
    if depth < n + 2:
        raise InsufficientDepth(f"need an enclosure at depth >= {n + 2}, schedule allows {depth}")
    convs = convergents(schedule, schedule.depth, depth_cap)
    return approximation_bounds_hold(convs, n, deepest_enclosure(convs), schedule.a0)
