import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uppertail import theory
from uppertail.constructions import clique_construction, hub_construction
from uppertail.errors import DomainError
from uppertail.patterns import TRIANGLE, pattern_catalog


def test_limit_examples():
    assert theory.limit_rate(3, 1.0, "dense_side") == pytest.approx(1 / 3, abs=1e-15)
    assert theory.limit_rate(3, 1.0, "sparse") == pytest.approx(0.5, abs=1e-15)
    assert theory.limit_rate(3, 7.0, theory.DENSE) == pytest.approx(7 ** (2 / 3) / 2, rel=1e-15)
    assert theory.limit_rate(3, 7.0, theory.DENSE) == pytest.approx(1.82965, abs=1e-5)
    for bad in (theory.BOUNDARY, theory.BELOW, "middle"):
        with pytest.raises(DomainError):
            theory.limit_rate(3, 1.0, bad)


def test_crossover():
    assert theory.crossover_delta(3) == 27 / 8
    assert Fraction(theory.crossover_delta(3)) == Fraction(27, 8)
    assert theory.crossover_delta(4) == 4.0
    for k in range(3, 9):
        d = theory.crossover_delta(k)
        assert abs(theory.clique_rate(k, d) - theory.hub_rate(k, d)) <= 1e-12


def test_regime_examples():
    assert theory.regime_classify(10 ** 6, 0.01, 3).label == theory.DENSE
    assert theory.regime_classify(10 ** 6, 1e-3, 3).label == theory.BOUNDARY
    # 5e-4 sits within a factor 3 of n^{-1/2}: boundary at the default margin, sparse at margin 1.5
    assert theory.regime_classify(10 ** 6, 5e-4, 3).label == theory.BOUNDARY
    assert theory.regime_classify(10 ** 6, 5e-4, 3, margin=1.5).label == theory.SPARSE
    assert theory.regime_classify(10 ** 6, 1e-4, 3).label == theory.SPARSE
    assert theory.regime_classify(10 ** 6, 1e-7, 3).label == theory.BELOW


def test_optimal_split_and_phi_prime():
    assert theory.optimal_split(1.0) == (0.0, 1 / 3)
    assert theory.optimal_split(8.0) == (8.0, 0.0)
    assert theory.optimal_split(27 / 8) == (27 / 8, 0.0)
    assert theory.phi_prime_limit(0, 0) == 0
    assert theory.phi_prime_limit(1, 0) == 0.5
    assert theory.phi_prime_limit(0, 0.7) == 0.7
    for d in np.linspace(0.1, 10, 40):
        split = theory.optimal_split(d)
        assert theory.phi_prime_limit(*split) == pytest.approx(theory.limit_rate(3, d, "dense"), rel=1e-12)


def test_cherry_limits():
    assert theory.cherry_diagnostic_limit(1.0, "dense") == pytest.approx(4 / 3)
    assert theory.cherry_diagnostic_limit(1.0, "sparse") == 1.0
    assert theory.cherry_diagnostic_limit(8.0, "dense") == 1.0
    with pytest.raises(DomainError):
        theory.cherry_diagnostic_limit(27 / 8, "dense")
    # consistent with the optimal split: hub split <-> 1 + delta/3
    for d in (0.5, 1.0, 3.0, 5.0, 9.0):
        d1, d2 = theory.optimal_split(d)
        assert theory.cherry_diagnostic_limit(d, "dense") == pytest.approx(1 + d2, rel=1e-15)


@given(k=st.integers(3, 8), delta=st.floats(0.01, 50))
@settings(max_examples=200, deadline=None)
def test_dense_limit_is_min_of_constructions(k, delta):
    r = theory.limit_rate(k, delta, "dense")
    assert r <= theory.clique_rate(k, delta) and r <= theory.hub_rate(k, delta)


def test_limit_below_finite_construction_rates():
    n, p = 10 ** 6, 0.01
    for d in (0.5, 1.0, 4.0):
        lim = theory.limit_rate(3, d, "dense")
        assert lim <= clique_construction(n, p, d).normalized_rate
        assert lim <= hub_construction(n, p, d).normalized_rate


def test_general_H_order():
    tri = theory.general_H_order(TRIANGLE, 10 ** 4, 0.1)
    assert (tri.n_exponent, tri.p_exponent) == (2, 2)
    assert tri.log_factor == pytest.approx(math.log(10))
    assert tri.lower <= tri.upper
    c4 = theory.general_H_order(pattern_catalog("cycle", 4), 10 ** 4, 0.1)
    assert c4.p_exponent == 2
    star = theory.general_H_order(pattern_catalog("star", 6), 10 ** 6, 0.2)
    assert star.p_exponent == 5 and star.lower <= star.upper
    with pytest.raises(DomainError):
        theory.general_H_order(pattern_catalog("star", 6), 100, 0.1)


def test_entropy_lower_bound_formula():
    # 1/2 n^2 c(p) (p ((1+delta)^{1/3} - 1))^2 with Pinsker's c = 2 for p = 0.25
    n, p, d = 60, 0.25, 1.0
    expected = 0.5 * n * n * 2.0 * (p * (2 ** (1 / 3) - 1)) ** 2
    assert theory.entropy_lower_bound(n, p, d) == pytest.approx(expected, rel=1e-14)


def test_union_bound_hand_computed():
    # eps = 1/2 needs eta p^3 = 3; M = 4^4 = 256
    p = 0.5
    eta = 3 / p ** 3
    ub = theory.union_bound_log_R(n=2, p=p, eta=eta)
    hand = 2 * math.log(256) + 256 ** 2 * math.log(2)
    assert ub.epsilon == 0.5
    assert ub.log_R == pytest.approx(hand, rel=1e-9)
    assert hand == pytest.approx(11.09 + 45426.1, abs=0.05)


def test_union_bound_limit_eps_to_one():
    p = 0.9
    eta = 6 * (1 - 1e-9) / p ** 3
    ub = theory.union_bound_log_R(n=5, p=p, eta=eta)
    assert ub.log_R == pytest.approx(5 * math.log(4), rel=1e-6)
    with pytest.raises(DomainError):
        theory.union_bound_log_R(n=5, p=0.9, eta=10.0)


def test_union_bound_monotone():
    base = theory.union_bound_log_R(n=10 ** 6, p=0.8, eta=2.0).log_log_R
    assert theory.union_bound_log_R(n=10 ** 6, p=0.8, eta=3.0).log_log_R < base
    assert theory.union_bound_log_R(n=10 ** 9, p=0.8, eta=2.0).log_log_R >= base
    # with M small the n log M term is visible
    eta = 6 * 0.9 / 0.8 ** 3
    small = theory.union_bound_log_R(n=10 ** 6, p=0.8, eta=eta).log_R
    assert theory.union_bound_log_R(n=10 ** 9, p=0.8, eta=eta).log_R > small


def test_union_bound_ratio_vanishes_in_log_log_space():
    # p = (log n)^{-1/7}: log log R ~ 6/7 log log n + const, scale ~ 2 log n
    ratios = []
    for log_n in (1e30, 1e60, 1e120):
        p = log_n ** (-1 / 7)
        eta = log_n ** (-1 / 100)
        ratios.append(theory.union_bound_log_ratio(p, eta, log_n=log_n))
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < math.log(0.01)


def test_union_bound_ratio_at_googolplex_scale_is_not_small():
    # n = 10^400 is far too small for the asymptotic comparison to kick in
    log_n = 400 * math.log(10)
    p = log_n ** (-1 / 7)
    assert theory.union_bound_log_ratio(p, 0.5, log_n=log_n) > 0


def test_tail_certificate():
    c0 = theory.tail_certificate(10 ** 5, 0.9, 2.0, 1.0, 0.0)
    assert c0.vacuous and c0.log_bound >= 0
    eta = 6 * 0.9 / 0.9 ** 3
    ub = theory.union_bound_log_R(n=10 ** 5, p=0.9, eta=eta)
    c1 = theory.tail_certificate(10 ** 5, 0.9, 8.0, eta, ub.log_R / 2)
    c2 = theory.tail_certificate(10 ** 5, 0.9, 8.0, eta, ub.log_R * 2)
    assert c1.vacuous and not c2.vacuous
    assert c2.log_bound == pytest.approx(-ub.log_R, rel=1e-12)
    with pytest.raises(DomainError):
        theory.tail_certificate(10, 0.5, 1.0, 1.5, 1.0)


def test_certificate_exponent_tends_to_minus_one():
    vals = []
    for log_n in (1e40, 1e80, 1e160):
        p = log_n ** (-1 / 7)
        eta = log_n ** (-1 / 100)
        vals.append(theory.certificate_relative_exponent(log_n, p, 1.0, eta))
    assert all(abs(v + 1) < 1e-9 for v in vals)
    # at moderate sizes the union-bound cost swamps the rate
    assert theory.certificate_relative_exponent(1e3, 0.5, 1.0, 0.5) > 0
