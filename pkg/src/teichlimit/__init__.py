"""Digit schedules for three slit tori whose Teichmueller ray tracks a target curve.

Pipeline: :func:`constructor.synthesize` turns a curve in the 2-simplex into
a :class:`certificate.ConstructionCertificate`; :mod:`trajectory` evaluates
the barycentric trajectory of curve-graph distance proxies; :mod:`verify`
re-checks certificates and runs the exact-vs-coarse oracles.
"""

from .certificate import ConstructionCertificate, compute_audit
from .coarse import error_budget
from .config import EpsilonRule, RunConfig
from .constructor import synthesize
from .contfrac import CFSchedule, Convergent, ExpDigit, convergents, value_enclosure
from .curves import TargetCurve, circle_in_simplex, constant, load_curve, polyline, segment
from .trajectory import Timeline, phi
from .verify import verify_certificate

__all__ = [
    "CFSchedule",
    "ConstructionCertificate",
    "Convergent",
    "EpsilonRule",
    "ExpDigit",
    "RunConfig",
    "TargetCurve",
    "Timeline",
    "circle_in_simplex",
    "compute_audit",
    "constant",
    "convergents",
    "error_budget",
    "load_curve",
    "phi",
    "polyline",
    "segment",
    "synthesize",
    "value_enclosure",
    "verify_certificate",
]
