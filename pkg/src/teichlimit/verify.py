"""Acceptance suites: oracle cross-checks and certificate re-verification."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .certificate import ConstructionCertificate, compute_audit
from .coarse import coarse_balance_time, coarse_log_q, error_budget
from .contfrac import (
    CFSchedule,
    ExpDigit,
    approximation_bounds_hold,
    check_unimodular,
    convergents,
    deepest_enclosure,
)
from .constructor import (
    CoarseState,
    _as_strings,
    choose_block_lengths,
    growth_lower_bound,
    select_thetas,
)
from .curves import curve_from_spec, l1
from .flatsurf import SlitSurface, TorusCurve, balance_time_exact
from .numerics import ctx, mpf, to_str
from .trajectory import Timeline, horoball_ratio, normalize

R_SWEEP = (0, 1, 2, 4)
HAUSDORFF_FACTOR = 33
# digits appended to relaxed schedules so the slope is pinned down
TAIL_DIGIT, TAIL_LENGTH = 2, 60
MAX_LISTED_FAILURES = 20


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    failure_count: int = 0
    worst_margin: Optional[object] = None
    notes: dict = field(default_factory=dict)

    def record(self, ok: bool, margin, label: str) -> None:
        self.cases += 1
        margin = mpf(margin)
        if self.worst_margin is None or margin < self.worst_margin:
            self.worst_margin = margin
        if not ok:
            self.failure_count += 1
            if len(self.failures) < MAX_LISTED_FAILURES:
                self.failures.append(label)

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def to_json(self) -> dict:
        return {
            "cases": str(self.cases),
            "failure_count": str(self.failure_count),
            "failures": list(self.failures),
            "worst_margin": None if self.worst_margin is None else to_str(self.worst_margin, 20),
            "notes": {k: str(v) for k, v in self.notes.items()},
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    suites: dict = field(default_factory=dict)

    def add(self, suite: SuiteResult) -> SuiteResult:
        self.suites[suite.name] = suite
        return suite

    @property
    def overall_pass(self) -> bool:
        return all(s.passed for s in self.suites.values())

    def failing_suites(self) -> list[str]:
        return [name for name, s in self.suites.items() if not s.passed]

    def to_json(self) -> dict:
        return {
            "overall_pass": self.overall_pass,
            "suites": {name: s.to_json() for name, s in sorted(self.suites.items())},
        }


# ------------------------------------------------- exact-vs-coarse oracles


def random_relaxed_schedules(
    seed: int, count: int, max_blocks: int = 10, max_length: int = 20, max_digit: int = 10**6
) -> list[CFSchedule]:
    """Small schedules with a fixed tail of 2s so the slope is well enclosed."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        blocks = []
        for _ in range(rng.randint(1, max_blocks)):
            top = min(max_digit, 10 ** rng.randint(1, 6))
            blocks.append((rng.randint(2, top), rng.randint(1, max_length)))
        out.append(with_tail(CFSchedule(tuple(blocks))))
    return out


def with_tail(schedule: CFSchedule) -> CFSchedule:
    return CFSchedule(schedule.blocks + ((TAIL_DIGIT, TAIL_LENGTH),), schedule.a0)


def _core_blocks(schedule: CFSchedule) -> int:
    """Blocks before the tail added by :func:`with_tail`."""
    n = len(schedule.blocks)
    return n - 1 if n > 1 and schedule.blocks[-1] == (TAIL_DIGIT, TAIL_LENGTH) else n


def cross_validate(schedules: Iterable[CFSchedule], depth_cap: int = 10**6) -> SuiteResult:
    """Coarse log q and T against the exact recurrence and exact balance times.

    Within block j the coarse values start from the exact log q_{N(j-1)}.
    Also checks that T_n - log(q_n q_{n+1})/2 lies in [0, log 2].
    """
    L = error_budget().L
    ln2 = ctx.log(2)
    suite = SuiteResult("oracle-equivalence")
    worst_gap = mpf(0)
    for s_idx, sch in enumerate(schedules):
        convs = convergents(sch, sch.depth, depth_cap)
        enc = deepest_enclosure(convs)
        surface = SlitSurface(0.5, (enc, enc, enc))
        starts = sch.block_starts()
        for j in range(1, _core_blocks(sch) + 1):
            base = ctx.log(convs[starts[j - 1]].q)
            for ell in range(sch.run_length(j) + 1):
                n = starts[j - 1] + ell
                exact_q = ctx.log(convs[n].q)
                gap = abs(coarse_log_q(sch, j, ell, base).value - exact_q)
                worst_gap = max(worst_gap, gap)
                suite.record(gap <= L, L - gap, f"schedule {s_idx} log q_{n}")
                if ell == sch.run_length(j):
                    continue
                exact_t = balance_time_exact(surface, TorusCurve.from_convergent(0, convs[n]))
                gap = abs(coarse_balance_time(sch, j, ell, base).value - exact_t)
                worst_gap = max(worst_gap, gap)
                suite.record(gap <= L, L - gap, f"schedule {s_idx} T_{n}")
                half = (exact_q + ctx.log(convs[n + 1].q)) / 2
                w = exact_t - half
                suite.record(0 <= w <= ln2, min(w, ln2 - w), f"schedule {s_idx} window {n}")
    suite.notes["worst_gap"] = to_str(worst_gap, 20)
    suite.notes["L"] = to_str(L, 20)
    return suite


def check_identities(schedules: Iterable[CFSchedule], depth_cap: int = 10**6) -> SuiteResult:
    suite = SuiteResult("identities")
    for s_idx, sch in enumerate(schedules):
        convs = convergents(sch, sch.depth, depth_cap)
        enc = deepest_enclosure(convs)
        for n in range(len(convs) - 1):
            ok = check_unimodular(convs[n], convs[n + 1])
            suite.record(ok, 0 if ok else -1, f"schedule {s_idx} unimodular {n}")
        for n in range(len(convs) - 2):
            ok = approximation_bounds_hold(convs, n, enc, sch.a0)
            suite.record(ok, 0 if ok else -1, f"schedule {s_idx} bounds {n}")
    return suite


# ---------------------------------------------------- certificate suites


def check_interleaving(cert: ConstructionCertificate) -> SuiteResult:
    """Re-derive coarse times block by block and test the interleaving chain.

    For i = 1, 2 both links must hold with room L on either side; for
    i = 0 the chain is checked as stated.
    """
    L = error_budget().L
    suite = SuiteResult("interleaving")
    scheds = cert.schedules
    base = [mpf(0), mpf(0), mpf(0)]
    for k in range(1, cert.K + 1):
        n = [sch.run_length(k) for sch in scheds]
        if min(n) < 3:
            suite.record(False, min(n) - 3, f"k={k} block shorter than 3")
            base = [coarse_log_q(scheds[i], k, n[i], base[i]).value for i in range(3)]
            continue
        t0 = coarse_balance_time(scheds[0], k, n[0] - 1, base[0]).value
        for i in range(3):
            low = coarse_balance_time(scheds[i], k, n[i] - 3, base[i]).value
            high = coarse_balance_time(scheds[i], k, n[i] - 1, base[i]).value
            pad = 0 if i == 0 else L
            m1 = (t0 - pad) - (low + pad)
            m2 = (high - pad) - (t0 + pad)
            suite.record(m1 > 0, m1, f"k={k} i={i} lower")
            suite.record(m2 >= 0, m2, f"k={k} i={i} upper")
        base = [coarse_log_q(scheds[i], k, n[i], base[i]).value for i in range(3)]
    return suite


def r_sweep_deviation(d, target, R) -> object:
    """Worst deviation from ``target`` over all distance triples within R of ``d``."""
    R = mpf(R)
    total = sum(d)
    worst = mpf(0)
    for ell in range(3):
        lo = (d[ell] - R) / (total + 3 * R)
        hi = (d[ell] + R) / (total - 3 * R)
        worst = max(worst, abs(lo - target[ell]), abs(hi - target[ell]))
    return worst


def check_tracking(
    cert: ConstructionCertificate, grid_density: int = 10, R_values: Sequence = R_SWEEP,
    timeline: Optional[Timeline] = None,
) -> SuiteResult:
    tl = timeline or Timeline(cert)
    suite = SuiteResult("tracking")
    for k in range(2, cert.K + 1):
        target = cert.plan.target(k)
        bound = 11 * cert.epsilon(k)
        for g, t in enumerate(tl.grid(k, grid_density)):
            d = tl.distances(t)
            p = normalize(d)
            dev = max(abs(a - b) for a, b in zip(p, target))
            suite.record(dev <= bound, bound - dev, f"k={k} grid={g}")
            for R in R_values:
                adj = bound + 3 * mpf(R) / sum(d)
                dev = r_sweep_deviation(d, target, R)
                suite.record(dev <= adj, adj - dev, f"k={k} grid={g} R={R}")
    return suite


def ratio_series(cert: ConstructionCertificate, timeline: Optional[Timeline] = None) -> list:
    """Horoball ratio per torus at the start of each window k = 2..K."""
    tl = timeline or Timeline(cert)
    return [
        [horoball_ratio(tl, i, tl.window(k)[0]) for i in range(3)] for k in range(2, cert.K + 1)
    ]


def check_ratio(
    cert: ConstructionCertificate, decreasing_from: int = 5, timeline: Optional[Timeline] = None
) -> SuiteResult:
    suite = SuiteResult("ratio")
    series = ratio_series(cert, timeline)
    for k, row in enumerate(series, start=2):
        eps = cert.epsilon(k)
        for i, r in enumerate(row):
            suite.record(r < eps, eps - r, f"k={k} i={i} below eps")
            if k > decreasing_from:
                prev = series[k - 3][i]
                suite.record(r < prev, prev - r, f"k={k} i={i} decreasing")
    return suite


def check_limit_set(
    cert: ConstructionCertificate, mesh: float = 0.05, grid_density: int = 10,
    timeline: Optional[Timeline] = None, coverage_allowance: Optional[float] = None,
) -> SuiteResult:
    """Two-sided finite-scale Hausdorff comparison of late phi values with the curve.

    Late phi values must lie within 33 eps_{ceil(K/2)} + mesh of the curve,
    and every curve sample within 33 eps_{ceil(K/2)} + ``coverage_allowance``
    of some late phi value.  The allowance defaults to the plan's resolution.
    """
    tl = timeline or Timeline(cert)
    suite = SuiteResult("hausdorff")
    curve = curve_from_spec(cert.curve)
    k0 = math.ceil(cert.K / 2)
    bound = HAUSDORFF_FACTOR * float(cert.epsilon(k0))
    resolution = float(cert.plan.resolution)
    allowance = resolution if coverage_allowance is None else float(coverage_allowance)
    collected = [
        tuple(float(x) for x in normalize(tl.distances(t)))
        for k in range(max(k0, 2), cert.K + 1)
        for t in tl.grid(k, grid_density)
    ]
    samples = curve.samples(mesh)
    worst_a = max(min(l1(p, c) for c in samples) for p in collected)
    worst_b = max(min(l1(c, p) for p in collected) for c in samples)
    suite.record(worst_a <= bound + mesh, bound + mesh - worst_a, "phi values near the curve")
    suite.record(
        worst_b <= bound + allowance, bound + allowance - worst_b, "curve near the phi values"
    )
    suite.notes.update(
        bound=repr(bound), mesh=repr(mesh), resolution=repr(resolution), allowance=repr(allowance),
        worst_phi_to_curve=repr(worst_a), worst_curve_to_phi=repr(worst_b),
    )
    return suite


def check_audit_replay(cert: ConstructionCertificate) -> SuiteResult:
    """Stored audit must equal a fresh evaluation and pass everywhere."""
    suite = SuiteResult("audit")
    fresh = compute_audit(cert)
    suite.record(
        len(fresh) == len(cert.audit), len(cert.audit) - len(fresh), "audit entry count"
    )
    for stored, new in zip(cert.audit, fresh):
        label = f"{new.id} {new.k_or_j} {new.case}"
        suite.record(stored == new, 0 if stored == new else -1, f"{label} replay mismatch")
        suite.record(new.passed, mpf(new.margin), f"{label} fails")
    return suite


def check_conformance(cert: ConstructionCertificate) -> SuiteResult:
    """Re-run the construction rules on the certificate's own inputs.

    Plan points must be images of their parameters, digits must be exactly
    the ones the scale rule produces, and each block's lengths must be the
    minimal choice given the earlier blocks.
    """
    suite = SuiteResult("conformance")
    L = error_budget().L
    curve = curve_from_spec(cert.curve)
    for j in range(1, cert.K + 1):
        ok = _as_strings(curve(float(cert.plan.params[j - 1]))) == cert.plan.targets[j - 1]
        suite.record(ok, 0 if ok else -1, f"plan point {j} off the curve")

    thetas = select_thetas(cert.plan, L, cert.digit_cap, exp_digits=True)
    for j in range(1, cert.K + 1):
        ok = thetas.scales[j - 1] == cert.scales[j - 1]
        suite.record(ok, 0 if ok else -1, f"j={j} scale differs from the doubling rule")
        for i in range(3):
            ok = thetas.digit(i, j) == cert.digit(i, j)
            suite.record(ok, 0 if ok else -1, f"j={j} i={i} digit not produced by the scale")

    state = CoarseState(
        [[cert.log_lambda(i, j) for j in range(1, cert.K + 1)] for i in range(3)]
    )
    R, closeness = mpf(cert.R), mpf(cert.closeness)
    for k in range(1, cert.K + 1):
        bound = growth_lower_bound(k, state, cert.epsilon(k + 1), R, L, closeness)
        ok = bound.N == cert.growth_N(k)
        suite.record(ok, 0 if ok else -1, f"k={k} growth bound differs")
        chosen = choose_block_lengths(k, bound.N, state, L)
        stored = tuple(cert.length(i, k) for i in range(3))
        for i in range(3):
            ok = chosen[i] == stored[i]
            suite.record(ok, chosen[i] - stored[i], f"k={k} i={i} length not minimal")
        state.push(stored)
    return suite


def verify_certificate(
    cert: ConstructionCertificate,
    grid_density: int = 10,
    mesh: float = 0.05,
    R_values: Sequence = R_SWEEP,
) -> VerificationReport:
    report = VerificationReport()
    report.add(check_audit_replay(cert))
    report.add(check_conformance(cert))
    report.add(check_interleaving(cert))
    try:
        tl = Timeline(cert)
        report.add(check_tracking(cert, grid_density, R_values, tl))
        report.add(check_ratio(cert, timeline=tl))
        report.add(check_limit_set(cert, mesh, grid_density, tl))
    except Exception as exc:  # a corrupted certificate may not even index cleanly
        broken = SuiteResult("trajectory")
        broken.record(False, -1, f"{type(exc).__name__}: {exc}")
        report.add(broken)
    return report


# ------------------------------------------------------------ mutations


def _mutate_length(cert: ConstructionCertificate, i: int, k: int, delta: int):
    blocks = list(cert.schedules[i].blocks)
    d, n = blocks[k - 1]
    if n + delta < 1:
        return None
    blocks[k - 1] = (d, n + delta)
    scheds = list(cert.schedules)
    scheds[i] = CFSchedule(tuple(blocks), cert.schedules[i].a0)
    return replace(cert, schedules=tuple(scheds))


def _mutate_digit(cert: ConstructionCertificate, i: int, j: int, delta: int):
    blocks = list(cert.schedules[i].blocks)
    d, n = blocks[j - 1]
    if isinstance(d, ExpDigit) or d + delta < 2:
        return None
    blocks[j - 1] = (d + delta, n)
    scheds = list(cert.schedules)
    scheds[i] = CFSchedule(tuple(blocks), cert.schedules[i].a0)
    return replace(cert, schedules=tuple(scheds))


def mutation_corpus(
    cert: ConstructionCertificate, count: int = 20, seed: int = 0, reaudit: bool = True
) -> list[tuple[str, ConstructionCertificate]]:
    """Single-unit perturbations of run lengths and explicit digits.

    Half the corpus perturbs some n_i(k), half some theta_i(j).  With
    ``reaudit`` the stored audit is recomputed for the mutated data, so a
    mutation cannot be caught merely by a stale audit.
    """
    rng = random.Random(seed)
    lengths = [(i, k, dlt) for k in range(1, cert.K + 1) for i in range(3) for dlt in (-1, 1)]
    digits = [
        (i, j, dlt)
        for j in range(1, cert.K + 1)
        for i in range(3)
        for dlt in (-1, 1)
        if not isinstance(cert.digit(i, j), ExpDigit)
    ]
    rng.shuffle(lengths)
    rng.shuffle(digits)
    out: list = []

    def take(pool, mutate, label, want):
        got = 0
        for i, idx, dlt in pool:
            if got == want:
                break
            m = mutate(cert, i, idx, dlt)
            if m is None:
                continue
            if reaudit:
                m = m.with_audit(compute_audit(m))
            out.append((f"{label}[i={i},{idx}] {dlt:+d}", m))
            got += 1

    want_digits = min(count // 2, len(digits))
    take(digits, _mutate_digit, "theta", want_digits)
    take(lengths, _mutate_length, "n", count - len(out))
    return out
