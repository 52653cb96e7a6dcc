import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csbi.analytic import (
    SIGN_CONVENTION_WARNING, UNSTABLE_HYPOTHESIS_WARNING, Case, LogBase,
    Status, convert_log_base, csbi, csbi_continuous, csbi_discrete,
    lemma2_identity, lemma4_identity, middleton_crosscheck, sung_crosscheck)
from csbi.errors import ZeroAtOrigin
from csbi.parser import parse_tf
from csbi.polynomial import Poly
from csbi.quadrature import csbi_continuous_numeric, csbi_discrete_numeric
from csbi.transfer_function import (
    ClosedLoop, Domain, LoopTF, cancel_common_factors, close_loop,
    relative_degree)

from _systems import random_stable_continuous, random_stable_discrete

L1 = parse_tf("-1.164e-4*(s-10)*(s+0.0625)/(s^2*(s+10))")
L2 = parse_tf("-5.77*(s-10)*(s+1)/(s*(s+10)*(s+1))")
L3 = parse_tf("-2.0348*(s-1)/(s^2+3*s+2)")
L4 = parse_tf("2*(z+2)/(z+0.5)")
L2_VALUE = 77 / 5770


@pytest.mark.parametrize("a, b, expected", [
    (1 + 2j, 1 + 2j, 0.0),
    (3, -1, 4 * math.pi),
    (1j, 2, -4 * math.pi),
])
def test_lemma2_identity(a, b, expected):
    assert lemma2_identity(a, b) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a, expected", [
    (0.5, 0.0),
    (0.0, 0.0),
    (1.0, 0.0),
    (-2.0, 4 * math.pi),
    (3j, 4 * math.pi * math.log2(3)),
])
def test_lemma4_identity(a, expected):
    assert lemma4_identity(a) == pytest.approx(expected, abs=1e-15)


def test_convert_log_base_round_trip():
    x = 0.37
    there = convert_log_base(x, LogBase.NATURAL, LogBase.BASE2)
    assert there == pytest.approx(x / math.log(2))
    assert convert_log_base(there, LogBase.BASE2, LogBase.NATURAL) == pytest.approx(x)
    assert convert_log_base(x, LogBase.BASE2, LogBase.BASE2) == x


class TestContinuous:
    def test_multi_integrator_example(self):
        r = csbi_continuous(L1)
        assert r.status is Status.FINITE and r.case_tag is Case.CONT_MULTI_INTEGRATOR
        assert r.value == pytest.approx(0.1, abs=1e-12)
        assert r.terms.correction == 0.0
        assert r.log_base is LogBase.NATURAL

    def test_single_integrator_example(self):
        r = csbi_continuous(L2)
        assert r.case_tag is Case.CONT_SINGLE_INTEGRATOR
        assert r.value == pytest.approx(L2_VALUE, abs=1e-12)

    def test_cancellation_invariance(self):
        a = csbi_continuous(L2).value
        b = csbi_continuous(cancel_common_factors(L2)).value
        assert abs(a - b) <= 1e-12

    def test_unbounded_example(self):
        r = csbi_continuous(L3)
        assert r.status is Status.MINUS_INFINITY
        assert r.case_tag is Case.CONT_NO_INTEGRATOR_UNBOUNDED
        assert r.value is None
        assert SIGN_CONVENTION_WARNING in r.warnings

    def test_unbounded_positive_sign(self):
        # T(0) = K / (2 + K) = -3 for K = -1.5, and the loop stays stable
        r = csbi_continuous(parse_tf("-1.5/((s+1)*(s+2))"))
        assert r.status is Status.PLUS_INFINITY

    def test_pure_integrator(self):
        assert csbi_continuous(parse_tf("1/s")).value == pytest.approx(-0.5)

    def test_rare_bounded_condition(self):
        # prod(-p) = 6 = -2K  =>  K = -3
        r = csbi_continuous(parse_tf("-3/((s+1)*(s+6))"))
        assert r.case_tag is Case.CONT_NO_INTEGRATOR_RARE
        assert r.value == pytest.approx(-1 - 1 / 6, abs=1e-12)
        q = csbi_continuous_numeric(close_loop(parse_tf("-3/((s+1)*(s+6))")))
        assert q.value == pytest.approx(r.value, abs=1e-3)

    def test_biproper_k_minus_one_divergent(self):
        r = csbi_continuous(parse_tf("-1*(s-1)*(s+2)/((s+3)*(s+4))"))
        assert r.case_tag is Case.CONT_BIPROPER_K_NEG1
        assert r.status is Status.MINUS_INFINITY
        assert any("DegenerateLeading" in w for w in r.warnings)

    def test_biproper_k_minus_one_with_integrator_is_undefined(self):
        r = csbi_continuous(parse_tf("-1*(s+1)*(s+2)/(s*(s+3))"))
        assert r.status is Status.UNDEFINED and r.value is None

    def test_boundary_zero_refused(self):
        r = csbi_continuous(parse_tf("(s^2+1)/(s*(s+1)^2)"))
        assert r.status is Status.REFUSED and "BoundaryZero" in r.reason

    def test_unstable_closed_loop_refused(self):
        r = csbi_continuous(parse_tf("-1*(s+2)/(s*(s+3))"))
        assert r.status is Status.REFUSED and "UnstableClosedLoop" in r.reason
        assert r.stability is not None and not r.stability.stable

    def test_dispatcher(self):
        assert csbi(L1).value == csbi_continuous(L1).value
        assert csbi(L4).value == csbi_discrete(L4).value


class TestDiscrete:
    def test_biproper_example(self):
        r = csbi_discrete(L4)
        assert r.case_tag is Case.DISC_BIPROPER
        assert r.value == pytest.approx(1 + math.log2(2 / 3), abs=1e-12)
        assert r.log_base is LogBase.BASE2
        assert any(w.startswith(UNSTABLE_HYPOTHESIS_WARNING) for w in r.warnings)

    def test_strictly_proper_no_zeros(self):
        r = csbi_discrete(parse_tf("0.5/(z-0.2)"))
        assert r.case_tag is Case.DISC_STRICTLY_PROPER
        assert r.value == -1.0
        assert r.warnings == ()

    @pytest.mark.parametrize("text, value", [
        ("(z-3)/z^2", math.log2(3)),
        ("(z-0.5)/z^2", 0.0),
    ])
    def test_listed_strictly_proper_values_have_unstable_loops(self, text, value):
        # both closed loops have a pole outside the unit disk, so the value is
        # returned together with the hypothesis warning
        r = csbi_discrete(parse_tf(text))
        assert r.value == pytest.approx(value, abs=1e-15)
        assert any(w.startswith(UNSTABLE_HYPOTHESIS_WARNING) for w in r.warnings)

    def test_noncausal_refused(self):
        r = csbi_discrete(parse_tf("-1*(z+2)/(z+3)"))
        assert r.status is Status.REFUSED and "NonCausal" in r.reason

    def test_zero_gain_undefined(self):
        L = LoopTF(Domain.DISCRETE, 0.0, (), (0.5 + 0j,), 0)
        assert csbi_discrete(L).status is Status.UNDEFINED

    def test_unit_circle_zero_refused(self):
        r = csbi_discrete(parse_tf("0.1*(z+1)/(z-0.5)^2"))
        assert r.status is Status.REFUSED and "BoundaryZero" in r.reason


class TestCrossChecks:
    @pytest.mark.parametrize("L, value", [(L1, 0.1), (L2, L2_VALUE), (parse_tf("1/s"), -0.5)])
    def test_middleton(self, L, value):
        assert middleton_crosscheck(close_loop(L)) == pytest.approx(value, abs=1e-12)

    def test_middleton_zero_at_origin(self):
        T = ClosedLoop.from_polys(Poly([0.0, 1.0]), Poly([1.0, 1.0]), Domain.CONTINUOUS)
        with pytest.raises(ZeroAtOrigin):
            middleton_crosscheck(T)

    @pytest.mark.parametrize("text, value", [
        ("0.5/(z-0.2)", -1.0),
        ("(z-3)/z^2", math.log2(3)),
        ("(z-0.5)/z^2", 0.0),
    ])
    def test_sung(self, text, value):
        assert sung_crosscheck(parse_tf(text)) == pytest.approx(value, abs=1e-15)


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_finite_value_is_sum_of_terms(seed):
    rng = np.random.default_rng(seed)
    for r in (csbi_continuous(random_stable_continuous(rng)),
              csbi_discrete(random_stable_discrete(rng))):
        assert r.is_finite
        assert r.value == pytest.approx(r.terms.nmp_zero_sum + r.terms.correction, abs=1e-12)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_continuous_matches_quadrature(seed):
    L = random_stable_continuous(np.random.default_rng(seed))
    r = csbi_continuous(L)
    T = close_loop(L)
    q = csbi_continuous_numeric(T)
    assert q.converged
    assert abs(r.value - q.value) <= max(1e-3, 1e-2 * abs(r.value))
    assert abs(middleton_crosscheck(T) - r.value) <= 1e-9 * max(1.0, abs(r.value))


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_discrete_matches_quadrature(seed):
    L = random_stable_discrete(np.random.default_rng(seed))
    r = csbi_discrete(L)
    q = csbi_discrete_numeric(close_loop(L))
    assert q.converged
    assert abs(r.value - q.value) <= 1e-3
    if relative_degree(L) >= 1:
        assert abs(sung_crosscheck(L) - r.value) <= 1e-12


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_discrete_value_ignores_gain_sign(seed):
    rng = np.random.default_rng(seed)
    L = random_stable_discrete(rng, nu=int(rng.integers(1, 3)))
    flipped = LoopTF(L.domain, -L.gain, L.zeros, L.poles, 0)
    a, b = csbi_discrete(L), csbi_discrete(flipped)
    assert a.value == b.value
    assert b.stability is not None
