"""Shared high-precision context.

Coarse times grow past 1e200 while the inequalities that matter are decided
by gaps of a few units, so every real-valued quantity in the coarse engine is
an mpf from this single fixed-precision context.  The precision is fixed at
import time and never mutated by library code, which keeps results
reproducible byte-for-byte.
"""

from fractions import Fraction

import mpmath

WORKING_DPS = 600

ctx = mpmath.MPContext()
ctx.dps = WORKING_DPS

mpf = ctx.mpf

# relative slack used when an inequality boundary might be hit by rounding
SLACK_REL = mpf(10) ** (-(WORKING_DPS - 60))

# significant digits written to files for derived (re-computable) reals
REPORT_DIGITS = 40
# significant digits of reals that *define* a certificate (exact on reload)
DEFINING_DIGITS = 60


def slack(magnitude) -> "mpmath.mpf":
    return abs(mpf(magnitude)) * SLACK_REL + SLACK_REL


def to_str(x, digits: int = REPORT_DIGITS) -> str:
    """Decimal string for an mpf/int/float value."""
    if isinstance(x, int):
        return str(x)
    return ctx.nstr(mpf(x), digits, strip_zeros=True)


def quantize(x, digits: int = DEFINING_DIGITS):
    """Round ``x`` to ``digits`` significant decimals and return (mpf, str).

    The returned string is the authoritative value; the mpf is its parse.
    """
    s = ctx.nstr(mpf(x), digits, strip_zeros=True)
    return mpf(s), s


def parse(s: str):
    return mpf(s)


def from_fraction(q: Fraction):
    return mpf(q.numerator) / q.denominator


def log10_magnitude(x) -> float:
    x = abs(mpf(x))
    if x == 0:
        return float("-inf")
    return float(ctx.log10(x))


def ceil_int(x) -> int:
    return int(ctx.ceil(x))


def floor_int(x) -> int:
    return int(ctx.floor(x))
