import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csbi.analytic import csbi_continuous, lemma2_identity, lemma4_identity
from csbi.parser import parse_tf
from csbi.polynomial import Poly
from csbi.quadrature import (
    GAUSS_WEIGHTS, KRONROD_NODES, KRONROD_WEIGHTS, QuadOptions, QuadStatus,
    Sign, adaptive_integrate, csbi_continuous_numeric, csbi_discrete_numeric,
    lemma2_numeric, lemma4_numeric, t_at_zero)
from csbi.transfer_function import ClosedLoop, Domain, close_loop

from _systems import random_stable_continuous, random_stable_discrete

L1 = parse_tf("-1.164e-4*(s-10)*(s+0.0625)/(s^2*(s+10))")
L2 = parse_tf("-5.77*(s-10)*(s+1)/(s*(s+10)*(s+1))")
L3 = parse_tf("-2.0348*(s-1)/(s^2+3*s+2)")
L4 = parse_tf("2*(z+2)/(z+0.5)")
# Direct integral of log2|T| for the discrete biproper example. T equals
# (2/3)(z+2)/(z+1.5); the zero at -2 adds log2(2) and the closed-loop pole
# at -1.5, outside the disk, subtracts log2(1.5). The integral is therefore
# 1 + 2 log2(2/3), not the closed-form value 1 + log2(2/3).
L4_INTEGRAL = 1 + 2 * math.log2(2 / 3)


class TestRule:
    def test_weight_sums(self):
        assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
        assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)

    def test_gauss_nodes_are_kronrod_subset(self):
        assert np.count_nonzero(GAUSS_WEIGHTS) == 7
        assert np.all(np.diff(KRONROD_NODES) > 0)

    @pytest.mark.parametrize("degree", range(23))
    def test_kronrod_exact_up_to_degree_22(self, degree):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        got = float(np.dot(KRONROD_WEIGHTS, KRONROD_NODES ** degree))
        assert got == pytest.approx(exact, abs=1e-14)

    @pytest.mark.parametrize("degree", range(14))
    def test_gauss_exact_up_to_degree_13(self, degree):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        got = float(np.dot(GAUSS_WEIGHTS, KRONROD_NODES ** degree))
        assert got == pytest.approx(exact, abs=1e-14)


def _plain(fn):
    def f(x):
        return fn(x), np.zeros(x.shape[0], dtype=bool)
    return f


@pytest.mark.parametrize("fn, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (np.exp, -1.0, 2.0, math.e ** 2 - math.exp(-1)),
    (lambda x: 1 / (1 + x * x), -50.0, 50.0, 2 * math.atan(50.0)),
    (lambda x: np.sqrt(np.abs(x)), -1.0, 1.0, 4 / 3),
])
def test_adaptive_integrate(fn, a, b, exact):
    r = adaptive_integrate(_plain(fn), a, b, 1e-10, 1_000_000)
    assert not r.exhausted
    assert abs(r.value - exact) <= max(r.error, 1e-12) * 3


def test_adaptive_integrate_log_singularity():
    def f(x):
        with np.errstate(divide="ignore"):
            v = np.log(np.abs(x - 0.3))
        return np.where(np.isfinite(v), v, 0.0), (np.abs(x - 0.3) < 1e-12).any(axis=1)
    exact = 0.7 * math.log(0.7) - 0.7 + 0.3 * math.log(0.3) - 0.3
    r = adaptive_integrate(f, 0.0, 1.0, 1e-8, 1_000_000, [0.3])
    assert r.value == pytest.approx(exact, abs=1e-7)


@pytest.mark.parametrize("kwargs", [
    {"abs_tol": 0.0}, {"abs_tol": -1.0}, {"max_evaluations": 999},
    {"split_frequency": 0.0},
])
def test_options_validated(kwargs):
    with pytest.raises(ValueError):
        QuadOptions(**kwargs)


class TestContinuousExamples:
    def test_multi_integrator(self):
        q = csbi_continuous_numeric(close_loop(L1))
        assert q.converged
        assert q.value == pytest.approx(0.1, abs=1e-3)
        assert abs(q.value - 0.1) <= 3 * q.abs_error_estimate

    def test_single_integrator(self):
        q = csbi_continuous_numeric(close_loop(L2))
        assert q.value == pytest.approx(0.0133, abs=1e-3)
        assert abs(q.value - 77 / 5770) <= 3 * q.abs_error_estimate

    def test_unbounded_probe(self):
        T = close_loop(L3)
        assert t_at_zero(T) == pytest.approx(2.0348 / 4.0348)
        q = csbi_continuous_numeric(T)
        assert q.status is QuadStatus.DIVERGENCE_SUSPECTED
        assert q.divergence_sign is Sign.MINUS
        assert q.value is None
        assert not any("did not show" in n for n in q.notes)

    def test_tighter_tolerance(self):
        q = csbi_continuous_numeric(close_loop(L1), QuadOptions(abs_tol=1e-8))
        assert q.converged and abs(q.value - 0.1) <= 1e-7

    def test_wrong_domain(self):
        with pytest.raises(ValueError):
            csbi_continuous_numeric(close_loop(L4))


class TestDiscreteExamples:
    def test_biproper_example_integral(self):
        q = csbi_discrete_numeric(close_loop(L4))
        assert q.converged
        assert abs(q.value - L4_INTEGRAL) <= 3 * q.abs_error_estimate

    def test_strictly_proper(self):
        q = csbi_discrete_numeric(close_loop(parse_tf("0.5/(z-0.2)")))
        assert q.value == pytest.approx(-1.0, abs=1e-3)

    def test_unity(self):
        T = ClosedLoop.from_polys(Poly([1.0]), Poly([1.0]), Domain.DISCRETE)
        assert csbi_discrete_numeric(T).value == 0.0

    def test_unstable_loop_integral_differs_from_closed_form(self):
        # the closed form assumes a stable loop; here the pole outside the
        # disk adds log2 of its modulus
        q = csbi_discrete_numeric(close_loop(parse_tf("(z-3)/z^2")))
        assert q.value == pytest.approx(0.0, abs=1e-6)

    def test_zero_on_unit_circle(self):
        # T has a zero at z = -1; the log singularity is integrable
        L = parse_tf("0.1*(z+1)/(z-0.5)^2")
        q = csbi_discrete_numeric(close_loop(L))
        assert q.converged
        assert q.value == pytest.approx(math.log2(0.1), abs=1e-3)


@pytest.mark.parametrize("a, b, expected, tol", [
    (2 + 1j, 2 + 1j, 0.0, 1e-6),
    (3, -1, 4 * math.pi, 1e-3),
    (1j, 2, -4 * math.pi, 1e-3),
])
def test_lemma2_numeric(a, b, expected, tol):
    assert lemma2_numeric(a, b).value == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("a, expected, tol", [
    (0.5, 0.0, 1e-6),
    (-2.0, 4 * math.pi, 1e-3),
    (1.0, 0.0, 1e-3),
])
def test_lemma4_numeric(a, expected, tol):
    assert lemma4_numeric(a).value == pytest.approx(expected, abs=tol)


complexes = st.builds(complex, st.floats(-5, 5), st.floats(-5, 5))


@given(complexes, complexes)
@settings(max_examples=60, deadline=None)
def test_lemma2_property(a, b):
    ref = lemma2_identity(a, b)
    q = lemma2_numeric(a, b)
    assert abs(ref - q.value) <= max(1e-4, 1e-3 * abs(ref))


@given(st.floats(0, 4), st.floats(-math.pi, math.pi))
@settings(max_examples=60, deadline=None)
def test_lemma4_property(r, th):
    a = r * complex(math.cos(th), math.sin(th))
    ref = lemma4_identity(a)
    assert abs(ref - lemma4_numeric(a).value) <= max(1e-4, 1e-3 * abs(ref))


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_converged_respects_tolerance_and_budget(seed):
    rng = np.random.default_rng(seed)
    opts = QuadOptions(abs_tol=1e-7, max_evaluations=500_000)
    for q in (csbi_continuous_numeric(close_loop(random_stable_continuous(rng)), opts),
              csbi_discrete_numeric(close_loop(random_stable_discrete(rng)), opts)):
        assert q.evaluations <= opts.max_evaluations
        if q.converged:
            assert q.abs_error_estimate <= opts.abs_tol


def test_budget_exhaustion_is_reported():
    opts = QuadOptions(abs_tol=1e-14, max_evaluations=1000)
    q = csbi_continuous_numeric(close_loop(L1), opts)
    assert q.status is QuadStatus.BUDGET_EXHAUSTED
    assert q.value is not None and q.evaluations <= 1000


def test_probe_respects_budget():
    q = csbi_continuous_numeric(close_loop(L3), QuadOptions(max_evaluations=1000))
    assert q.evaluations <= 1000


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_refinement_does_not_degrade(seed):
    L = random_stable_continuous(np.random.default_rng(seed))
    ref = csbi_continuous(L).value
    T = close_loop(L)
    coarse = csbi_continuous_numeric(T, QuadOptions(abs_tol=1e-5))
    fine = csbi_continuous_numeric(T, QuadOptions(abs_tol=5e-6))
    assert abs(fine.value - ref) <= abs(coarse.value - ref) + coarse.abs_error_estimate


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_full_axis_matches_half_axis(seed):
    rng = np.random.default_rng(seed)
    for L, numeric in ((random_stable_continuous(rng), csbi_continuous_numeric),
                       (random_stable_discrete(rng), csbi_discrete_numeric)):
        T = close_loop(L)
        half = numeric(T)
        full = numeric(T, QuadOptions(use_symmetry=False))
        assert abs(half.value - full.value) <= 2 * max(half.abs_error_estimate,
                                                       full.abs_error_estimate)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_divergence_probe_sign(seed):
    L = random_stable_continuous(np.random.default_rng(seed), integrators=0)
    T = close_loop(L)
    t0 = abs(t_at_zero(T))
    if abs(t0 - 1.0) <= 1e-3:
        return
    q = csbi_continuous_numeric(T)
    assert q.status is QuadStatus.DIVERGENCE_SUSPECTED
    assert q.divergence_sign is (Sign.PLUS if t0 > 1 else Sign.MINUS)
