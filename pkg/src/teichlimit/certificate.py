"""Construction certificates: serialization and the inequality audit."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

from . import coarse
from .coarse import error_budget, log_dominant_root
from .contfrac import CFSchedule, Digit
from .errors import CertificateFormatError
from .numerics import WORKING_DPS, log10_magnitude, mpf, to_str

FORMAT = "teichlimit-certificate/1"
# decimal digits kept free above the largest coarse magnitude
PRECISION_HEADROOM = 80


@dataclass(frozen=True)
class AuditEntry:
    id: str
    k_or_j: int
    case: str
    lhs: str
    rhs: str
    margin: str
    passed: bool

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "k_or_j": str(self.k_or_j),
            "case": self.case,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AuditEntry":
        return cls(
            obj["id"], int(obj["k_or_j"]), obj["case"], obj["lhs"], obj["rhs"],
            obj["margin"], bool(obj["pass"]),
        )


def _entry(id_, kj, case, lhs, rhs, strict=True) -> AuditEntry:
    lhs, rhs = mpf(lhs), mpf(rhs)
    ok = lhs < rhs if strict else lhs <= rhs
    return AuditEntry(id_, kj, case, to_str(lhs), to_str(rhs), to_str(rhs - lhs), bool(ok))


@dataclass(frozen=True)
class ConstructionCertificate:
    s: str
    epsilon0: str
    r0: str
    R: str
    closeness: str
    digit_cap: int
    L: str
    L_terms: dict
    horoball: dict
    curve: dict
    plan: "DensePlan"
    scales: tuple[str, ...]
    schedules: tuple[CFSchedule, CFSchedule, CFSchedule]
    growth_bounds: tuple[dict, ...]
    audit: tuple[AuditEntry, ...] = ()

    # ---------------------------------------------------------- accessors

    @property
    def K(self) -> int:
        return len(self.schedules[0].blocks)

    def digit(self, i: int, j: int) -> Digit:
        return self.schedules[i].digit(j)

    def length(self, i: int, k: int) -> int:
        return self.schedules[i].run_length(k)

    def log_lambda(self, i: int, j: int):
        return log_dominant_root(self.digit(i, j))

    def epsilon(self, j: int):
        return self.plan.epsilon(j)

    def growth_N(self, k: int) -> int:
        return int(self.growth_bounds[k - 1]["N"])

    @cached_property
    def starts(self) -> tuple[list[int], ...]:
        return tuple(sch.block_starts() for sch in self.schedules)

    @cached_property
    def log_q(self) -> tuple[list, ...]:
        return tuple(coarse.block_log_q(sch) for sch in self.schedules)

    @property
    def passed(self) -> bool:
        return bool(self.audit) and all(e.passed for e in self.audit)

    def with_audit(self, audit) -> "ConstructionCertificate":
        return replace(self, audit=tuple(audit))

    # ------------------------------------------------------- construction

    @classmethod
    def from_construction(cls, built, curve, config) -> "ConstructionCertificate":
        budget = error_budget()
        schedules = tuple(
            CFSchedule(tuple(zip(built.thetas.digits[i], built.lengths[i])))
            for i in range(3)
        )
        growth = tuple(
            {
                "k": str(k),
                "N": str(g.N),
                "parts": {name: str(v) for name, v in sorted(g.parts.items())},
                "H": {name: to_str(v) for name, v in sorted(g.H.items())},
            }
            for k, g in enumerate(built.growth, start=1)
        )
        return cls(
            s=repr(float(config.slit)),
            epsilon0=repr(float(config.epsilon0)),
            r0=repr(float(config.r0)),
            R=repr(float(config.R)),
            closeness=repr(float(config.closeness)),
            digit_cap=int(config.digit_cap),
            L=to_str(budget.L),
            L_terms=budget.as_strings(),
            horoball={
                "scale": repr(float(config.horoball_scale)),
                "offset": repr(float(config.horoball_offset)),
            },
            curve=curve.spec,
            plan=built.plan,
            scales=built.thetas.scales,
            schedules=schedules,
            growth_bounds=growth,
        )

    # ------------------------------------------------------ serialization

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "K": str(self.K),
            "s": self.s,
            "epsilon0": self.epsilon0,
            "r0": self.r0,
            "R": self.R,
            "closeness": self.closeness,
            "digit_cap": str(self.digit_cap),
            "L": self.L,
            "L_terms": dict(self.L_terms),
            "horoball": dict(self.horoball),
            "curve": self.curve,
            "plan": self.plan.to_json(),
            "scales": list(self.scales),
            "schedules": [sch.to_json() for sch in self.schedules],
            "growth_bounds": list(self.growth_bounds),
            "audit": [e.to_json() for e in self.audit],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "ConstructionCertificate":
        from .constructor import DensePlan

        if not isinstance(obj, dict) or obj.get("format") != FORMAT:
            raise CertificateFormatError(f"not a {FORMAT} document")
        try:
            cert = cls(
                s=obj["s"],
                epsilon0=obj["epsilon0"],
                r0=obj["r0"],
                R=obj["R"],
                closeness=obj["closeness"],
                digit_cap=int(obj["digit_cap"]),
                L=obj["L"],
                L_terms=dict(obj["L_terms"]),
                horoball=dict(obj["horoball"]),
                curve=obj["curve"],
                plan=DensePlan.from_json(obj["plan"]),
                scales=tuple(obj["scales"]),
                schedules=tuple(CFSchedule.from_json(s) for s in obj["schedules"]),
                growth_bounds=tuple(obj["growth_bounds"]),
                audit=tuple(AuditEntry.from_json(e) for e in obj["audit"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CertificateFormatError(f"malformed certificate: {exc!r}") from exc
        if len(cert.schedules) != 3:
            raise CertificateFormatError("expected three schedules")
        if len({len(s.blocks) for s in cert.schedules}) != 1 or cert.K != cert.plan.K:
            raise CertificateFormatError("schedules and plan disagree on the number of blocks")
        if len(cert.growth_bounds) != cert.K or len(cert.scales) != cert.K:
            raise CertificateFormatError("growth bounds or scales do not cover every block")
        return cert

    @classmethod
    def loads(cls, text: str) -> "ConstructionCertificate":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CertificateFormatError(
                f"line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        return cls.from_json(obj)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ConstructionCertificate":
        return cls.loads(Path(path).read_text())


# ------------------------------------------------------------------- audit


def _inverse_share(lams):
    inv = [1 / x for x in lams]
    total = sum(inv)
    return [x / total for x in inv]


def compute_audit(cert: ConstructionCertificate) -> tuple[AuditEntry, ...]:
    """Re-evaluate every enforced inequality from the certificate's own data."""
    L = error_budget().L
    K = cert.K
    out: list[AuditEntry] = []
    lam = [[cert.log_lambda(i, j) for j in range(1, K + 1)] for i in range(3)]

    for j in range(1, K + 1):
        eps_j, eps_next = cert.epsilon(j), cert.epsilon(j + 1)
        target = cert.plan.target(j)
        if j >= 2:
            prev = cert.plan.target(j - 1)
            for i in range(3):
                out.append(_entry("plan-step", j, f"i={i}", abs(prev[i] - target[i]), eps_j))
        for i in range(3):
            out.append(_entry("growth-floor", j, f"i={i}", 4 * L, lam[i][j - 1], strict=False))
        if j < K:
            for i in range(3):
                for ell in range(3):
                    ratio = lam[ell][j - 1] / lam[i][j]
                    out.append(_entry("scale-separation", j, f"i={i},l={ell}", ratio, cert.epsilon(j + 1)))
        share = _inverse_share([lam[i][j - 1] for i in range(3)])
        for i in range(3):
            out.append(_entry("proportion", j, f"i={i}", abs(share[i] - target[i]), eps_next))

    for k in range(1, K + 1):
        n = [cert.length(i, k) for i in range(3)]
        b = [cert.log_q[i][k - 1] for i in range(3)]
        lk = [lam[i][k - 1] for i in range(3)]
        t0_end = b[0] + (n[0] - mpf(1) / 2) * lk[0]
        for i in (1, 2):
            ti_end = b[i] + (n[i] - mpf(1) / 2) * lk[i]
            ti_low = b[i] + (n[i] - mpf(5) / 2) * lk[i]
            out.append(_entry("interleave-lower", k, f"i={i}", ti_low + L, t0_end - L))
            out.append(_entry("interleave-upper", k, f"i={i}", t0_end + L, ti_end - L, strict=False))
        N = cert.growth_N(k)
        for i in range(3):
            out.append(_entry("growth", k, f"i={i}", N, n[i], strict=False))
            out.append(_entry("min-length", k, f"i={i}", 3, n[i], strict=False))

    top = max(cert.log_q[i][-1] for i in range(3))
    out.append(
        _entry("precision", K, "all", log10_magnitude(top) + PRECISION_HEADROOM, WORKING_DPS)
    )
    return tuple(out)
