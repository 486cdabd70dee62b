import json

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TARGETS
from oracles import growth_conditions_hold
from teichlimit.certificate import ConstructionCertificate, compute_audit
from teichlimit.coarse import error_budget, log_dominant_root
from teichlimit.config import EpsilonRule, RunConfig
from teichlimit.constructor import (
    CoarseState,
    DensePlan,
    build_dense_plan,
    choose_block_lengths,
    digits_for_scale,
    floored_proxy,
    growth_lower_bound,
    h_constant,
    inverse_share,
    select_thetas,
    smallest_tail,
    synthesize,
)
from teichlimit.contfrac import ExpDigit
from teichlimit.curves import constant, segment
from teichlimit.errors import DigitCapExceeded, DomainError
from teichlimit.numerics import mpf

L = error_budget().L


def sup(a, b):
    return max(abs(float(x) - float(y)) for x, y in zip(a, b))


# ----------------------------------------------------------------- plan


def test_constant_plan():
    plan = build_dense_plan(TARGETS["constant"](), 10)
    assert all(t == plan.targets[0] for t in plan.targets)
    assert float(plan.resolution) < 1e-12
    assert len(plan.epsilons) == 11


@pytest.mark.parametrize("name", ["segment", "triangle"])
def test_plan_steps_are_small(name):
    plan = build_dense_plan(TARGETS[name](), 30)
    for j in range(2, 31):
        assert sup(plan.target(j), plan.target(j - 1)) < float(plan.epsilon(j))


def test_segment_plan_starts_in_the_middle():
    plan = build_dense_plan(TARGETS["segment"](), 8)
    assert plan.target_floats(1) == (0.5, 0.5, 0.0)
    assert plan.params[0] == "0.5"


def test_triangle_plan_visits_every_edge():
    curve = TARGETS["triangle"]()
    plan = build_dense_plan(curve, 30)
    edges = {min(int(3 * (float(p) % 1)), 2) for p in plan.params}
    assert edges == {0, 1, 2}


def test_plan_json_round_trip():
    plan = build_dense_plan(TARGETS["segment"](), 6)
    assert DensePlan.from_json(json.loads(json.dumps(plan.to_json()))) == plan


def test_epsilon_rule_validation():
    assert EpsilonRule()(1) == 0.4
    assert EpsilonRule(0.4, 0.5)(3) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        EpsilonRule(0.6, 0.8)
    with pytest.raises(ValueError):
        EpsilonRule(0.4, 1.0)
    with pytest.raises(ValueError):
        build_dense_plan(TARGETS["segment"](), 1)


# --------------------------------------------------------------- digits


def test_digits_for_half_quarter_quarter():
    row = digits_for_scale([mpf(1) / 2, mpf(1) / 4, mpf(1) / 4], 16)
    assert row[0] == 8886110
    assert row[1] == row[2]
    assert float(row[1]) == pytest.approx(7.8963e13, rel=1e-4)
    assert abs(log_dominant_root(row[1]) - 32) < 1e-12


def test_boundary_target_is_floored():
    proxy = floored_proxy((1, 0, 0), 0.3)
    assert min(proxy) > 0 and float(sum(proxy)) == pytest.approx(1)
    assert float(proxy[1]) == pytest.approx(0.05 / 1.1)
    row = digits_for_scale(proxy, 16)
    assert row[1] == row[2] and row[0] < row[1]


def test_digit_cap_without_exp_digits():
    with pytest.raises(DigitCapExceeded) as err:
        digits_for_scale([mpf(1) / 2, mpf(1) / 4, mpf(1) / 4], 8000, digit_cap=100, exp_digits=False)
    assert err.value.cap == 100
    row = digits_for_scale([mpf(1) / 2, mpf(1) / 4, mpf(1) / 4], 8000, digit_cap=100)
    assert all(isinstance(d, ExpDigit) for d in row)


def test_select_thetas_meets_scale_conditions():
    plan = build_dense_plan(TARGETS["segment"](), 12)
    thetas = select_thetas(plan, L)
    prev = None
    for j in range(1, 13):
        lams = [thetas.log_lambda(i, j) for i in range(3)]
        assert min(lams) >= 4 * L
        if prev is not None:
            assert prev / min(lams) < plan.epsilon(j)
        share = inverse_share(lams)
        assert max(abs(a - b) for a, b in zip(share, plan.target(j))) < plan.epsilon(j + 1)
        prev = max(lams)


def test_symmetric_target_gives_equal_digits():
    thetas = select_thetas(build_dense_plan(TARGETS["constant"](), 6), L)
    for j in range(1, 7):
        assert thetas.digit(0, j) == thetas.digit(1, j) == thetas.digit(2, j)


# -------------------------------------------------------- growth bound


def test_smallest_tail_examples():
    assert smallest_tail(lambda n: n >= 17, 3, 1) == 17
    assert smallest_tail(lambda n: n >= 17, 1000, 1) == 17
    assert smallest_tail(lambda n: True, 50, 4) == 4


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_smallest_tail_property(threshold, guess, lo):
    assert smallest_tail(lambda n: n >= threshold, guess, lo) == max(threshold, lo)


def _state_after(name, K, blocks):
    plan = build_dense_plan(TARGETS[name](), K)
    thetas = select_thetas(plan, L)
    state = CoarseState.from_thetas(thetas)
    for k in range(1, blocks + 1):
        bound = growth_lower_bound(k, state, plan.epsilon(k + 1), 2, L)
        state.push(choose_block_lengths(k, bound.N, state, L))
    return plan, state


@pytest.mark.parametrize("name,k", [("segment", 1), ("segment", 4), ("triangle", 3), ("constant", 6)])
def test_growth_bound_is_minimal(name, k):
    plan, state = _state_after(name, 10, k - 1)
    eps = plan.epsilon(k + 1)
    bound = growth_lower_bound(k, state, eps, 2, L)
    for n in range(bound.N, bound.N + 40):
        assert growth_conditions_hold(n, k, state, eps, 2, L, 0.25)
    assert bound.N == 3 or not growth_conditions_hold(bound.N - 1, k, state, eps, 2, L, 0.25)


def test_growth_bound_monotone_in_tolerance():
    plan, state = _state_after("segment", 8, 2)
    eps = plan.epsilon(4)
    loose = growth_lower_bound(3, state, eps, 2, L, 0.25).N
    tight = growth_lower_bound(3, state, eps, 2, L, 0.125).N
    assert tight >= loose
    assert growth_lower_bound(3, state, eps, 4, L).N >= loose


def test_h_constant_matches_symbolic_rearrangement():
    # the offset as an independent exact expression, evaluated by sympy
    b, lam_i, lam_l, Lsym = sympy.symbols("b lam_i lam_l L", positive=True)
    H = sympy.Rational(5, 2) + (b + 3 * Lsym + sympy.Rational(5, 2) * lam_l) / lam_i
    vals = {b: 7.25, lam_i: 13.5, lam_l: 20.0, Lsym: float(L)}
    got = h_constant(mpf(7.25), mpf(13.5), mpf(20), L)
    assert float(got) == pytest.approx(float(H.subs(vals)), rel=1e-14)


# --------------------------------------------------------- block lengths


def test_symmetric_state_lengths():
    # equal starting data: the partners need one extra step to clear 2L
    plan, state = _state_after("constant", 6, 0)
    bound = growth_lower_bound(1, state, plan.epsilon(2), 2, L)
    n = choose_block_lengths(1, bound.N, state, L)
    assert n[1] == n[2] == n[0] + 1
    assert n[0] >= bound.N
    state.push(n)
    later = choose_block_lengths(2, growth_lower_bound(2, state, plan.epsilon(3), 2, L).N, state, L)
    assert later[1] == later[2]


def test_lengths_respect_minimum():
    _, state = _state_after("triangle", 10, 10)
    for i in range(3):
        assert all(n >= 3 for n in state.lengths[i])


# ---------------------------------------------------------- certificates


def test_audit_covers_every_rule(cert_factory):
    cert = cert_factory("segment", 4)
    ids = {e.id for e in cert.audit}
    assert ids == {
        "plan-step", "growth-floor", "scale-separation", "proportion", "interleave-lower", "interleave-upper",
        "growth", "min-length", "precision",
    }
    assert cert.passed
    assert compute_audit(cert) == cert.audit


def test_small_certificate():
    cert = synthesize(segment((1, 0, 0), (0, 1, 0)), 2, RunConfig(K=2))
    assert cert.K == 2 and cert.passed
    assert all(cert.length(i, k) >= 3 for i in range(3) for k in (1, 2))


def test_certificate_is_deterministic(cert_factory):
    first = cert_factory("triangle", 6).dumps()
    again = synthesize(TARGETS["triangle"](), 6, RunConfig(K=6)).dumps()
    assert first == again


def test_certificate_round_trip(cert_factory, tmp_path):
    cert = cert_factory("segment", 6)
    path = tmp_path / "c.json"
    cert.save(path)
    back = ConstructionCertificate.load(path)
    assert back == cert
    assert back.dumps() == cert.dumps()


def test_recorded_slit_and_threshold():
    with pytest.raises(DomainError):
        synthesize(constant((1 / 3, 1 / 3, 1 / 3)), 3, RunConfig(K=3, s=0.01))
    cert = synthesize(constant((1 / 3, 1 / 3, 1 / 3)), 3, RunConfig(K=3, s=1e-9))
    assert float(cert.s) == 1e-9


def test_large_scales_use_exp_digits(cert_factory):
    cert = cert_factory("segment", 24)
    assert any(
        isinstance(cert.digit(i, j), ExpDigit) for i in range(3) for j in range(1, cert.K + 1)
    )
    assert cert.passed
