from dataclasses import replace

import pytest

from teichlimit.contfrac import CFSchedule
from teichlimit.numerics import mpf
from teichlimit.trajectory import Timeline
from teichlimit.verify import (
    check_audit_replay,
    check_conformance,
    check_identities,
    check_interleaving,
    check_limit_set,
    check_ratio,
    check_tracking,
    cross_validate,
    mutation_corpus,
    r_sweep_deviation,
    random_relaxed_schedules,
    verify_certificate,
    with_tail,
)


def test_relaxed_schedules_are_reproducible():
    a = random_relaxed_schedules(7, 10)
    assert a == random_relaxed_schedules(7, 10)
    assert a != random_relaxed_schedules(8, 10)
    for sch in a:
        assert sch.blocks[-1] == (2, 60)
        assert 2 <= len(sch.blocks) <= 11


def test_cross_validate_small_cases():
    scheds = [with_tail(CFSchedule(((2, 5), (3, 4)))), with_tail(CFSchedule(((10**6, 3),)))]
    suite = cross_validate(scheds)
    assert suite.passed and suite.cases > 0
    assert float(suite.notes["worst_gap"]) < float(suite.notes["L"])
    assert check_identities(scheds).passed


def test_twos_gap_is_small():
    suite = cross_validate([with_tail(CFSchedule.repeated(2, 30))])
    assert suite.passed
    assert float(suite.notes["worst_gap"]) == pytest.approx(0.188226, abs=1e-6)


def test_cross_validate_random():
    scheds = random_relaxed_schedules(0, 25)
    suite = cross_validate(scheds)
    assert suite.passed, suite.failures
    assert check_identities(scheds).passed


def test_r_sweep_deviation():
    d = (10, 10, 20)
    target = (mpf(1) / 4, mpf(1) / 4, mpf(1) / 2)
    assert r_sweep_deviation(d, target, 0) == 0
    assert r_sweep_deviation(d, target, 1) > 0
    assert r_sweep_deviation(d, target, 2) > r_sweep_deviation(d, target, 1)


@pytest.mark.parametrize("name", ["constant", "segment", "triangle"])
def test_suites_pass(cert_factory, name):
    cert = cert_factory(name, 10)
    report = verify_certificate(cert)
    assert report.overall_pass, report.failing_suites()
    assert set(report.suites) == {
        "audit", "conformance", "interleaving", "tracking", "ratio", "hausdorff",
    }
    js = report.to_json()
    assert js["overall_pass"] is True
    assert js["suites"]["tracking"]["pass"] is True


def test_individual_suites(cert_factory):
    cert = cert_factory("segment", 8)
    tl = Timeline(cert)
    assert check_audit_replay(cert).passed
    assert check_conformance(cert).passed
    assert check_interleaving(cert).passed
    tracking = check_tracking(cert, 5, timeline=tl)
    assert tracking.passed and tracking.cases == 7 * 5 * 5
    assert check_ratio(cert, timeline=tl).passed
    hd = check_limit_set(cert, timeline=tl)
    assert hd.cases == 2
    assert float(hd.notes["resolution"]) == float(cert.plan.resolution)


def test_broken_interleaving_is_caught(cert_factory):
    cert = cert_factory("segment", 6)
    blocks = list(cert.schedules[1].blocks)
    d, n = blocks[2]
    blocks[2] = (d, n // 2)
    scheds = list(cert.schedules)
    scheds[1] = CFSchedule(tuple(blocks))
    bad = replace(cert, schedules=tuple(scheds))
    assert not check_interleaving(bad).passed
    assert not check_conformance(bad).passed
    assert not verify_certificate(bad).overall_pass


def test_stale_audit_is_caught(cert_factory):
    cert = cert_factory("segment", 6)
    audit = list(cert.audit)
    audit[3] = replace(audit[3], margin="123")
    suite = check_audit_replay(replace(cert, audit=tuple(audit)))
    assert not suite.passed


def test_mutation_corpus_is_caught(cert_factory):
    cert = cert_factory("triangle", 8)
    corpus = mutation_corpus(cert, count=10, seed=1)
    assert len(corpus) == 10
    assert sum(label.startswith("theta") for label, _ in corpus) == 5
    for label, mutant in corpus:
        assert not verify_certificate(mutant).overall_pass, label
