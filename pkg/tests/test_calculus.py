import math

import numpy as np
import pytest

from perspectra import catalog
from perspectra.calculus import (AffineMap, IntervalK, affine_perspective, compose_monotone,
                                 composed_perspective, constrained_perspective, direct_sum,
                                 direct_sum_perspective, expectation_perspective,
                                 generalized_huber_perspective, marginal, precompose_linear,
                                 scale_add, trex)
from perspectra.core import (INF, AllInfinite, BadParam, BadScale, BadWeights, BadWitness,
                             ConvexFunction, EmptyIntersection, FlagViolation)
from perspectra.perspective import Perspective
from perspectra.verify import calculus_checks, check_entries, convexity_chord_check

SQ1 = catalog.make_norm_power(1, 2.0)
ABS = catalog.make_norm_power(1, 1.0)
NORM2 = catalog.make_norm_power(2, 1.0)


def test_scale_add():
    assert scale_add(1.0, SQ1, ABS)([2.0]) == 6
    combo = Perspective(scale_add(2.0, SQ1, catalog.make_zero(1)))
    assert combo.value(2, [4]) == 16 == 2 * Perspective(SQ1).value(2, [4])
    with pytest.raises(BadScale):
        scale_add(0.0, SQ1, ABS)


def test_scale_add_needs_common_domain_point():
    pos = ConvexFunction(1, lambda y: INF if y[0] < 0 else y[0], [1.0])
    neg = ConvexFunction(1, lambda y: INF if y[0] > -1 else -y[0], [-1.0])
    with pytest.raises(EmptyIntersection):
        scale_add(1.0, pos, neg)


def test_precompose_linear():
    M = np.array([[1.0], [0.0]])
    f = precompose_linear(catalog.make_norm_power(2, 2.0), M)
    assert f([3.0]) == 9
    assert Perspective(f).value(3, [3]) == 3
    g = precompose_linear(catalog.make_entropy(), np.zeros((1, 2)))
    assert g([5.0, -7.0]) == 0


def test_compose_monotone():
    fair = compose_monotone(catalog.make_fair(1.0, 1.0), NORM2)
    assert Perspective(fair).value(1, [1, 0]) == pytest.approx(1 - math.log(2), rel=1e-14)
    lb = catalog.make_log_barrier(2.0)
    got = composed_perspective(lb, NORM2, 2, [1, 0])
    assert got == pytest.approx(2 * math.log(4) - 2 * math.log(3), rel=1e-14)


def test_composed_vapnik_matches_catalog(rng):
    outer = catalog.make_vapnik(1, 1.0)
    composed = Perspective(compose_monotone(outer, NORM2))
    direct = Perspective(catalog.make_vapnik(2, 1.0))
    for _ in range(100):
        eta = rng.choice([0.0, rng.uniform(0.1, 3)])
        y = 2 * rng.standard_normal(2)
        assert composed.value(eta, y) == pytest.approx(direct.value(eta, y), rel=1e-12, abs=1e-12)


def test_compose_monotone_flags():
    with pytest.raises(FlagViolation):
        compose_monotone(catalog.make_entropy(), NORM2)


def test_direct_sum():
    parts = [SQ1, SQ1]
    P = Perspective(direct_sum(parts))
    assert P.value(2, [4, 2]) == 10 == direct_sum_perspective(parts, 2, [[4], [2]])
    assert P.value(0, [0, 0]) == 0
    assert P.value(0, [1, 0]) == INF


def test_affine_perspective():
    A = AffineMap(L=[[1.0, 0.0]], r=[0.0], u=[0.0, 1.0], rho=0.0)
    f = affine_perspective(SQ1, A, [0.0, 1.0])
    assert f([2, 1]) == 4
    assert f([2, -1]) == INF
    assert f([0, 0]) == 0
    with pytest.raises(BadWitness):
        affine_perspective(SQ1, A, [1.0, -1.0])
    with pytest.raises(BadParam):
        AffineMap(L=[[1.0, 0.0]], r=[0.0, 0.0], u=[0.0, 1.0])


def test_trex():
    args = dict(L=[[1.0, 0.0]], r=[0.0], u=[0.0, 1.0], rho=0.0, q=2.0)
    assert trex(**args, s=1)([2, 1]) == 4
    assert trex(**args, s=2)([2, 1]) == 16
    assert trex(**args, s=2)([0, 0]) == 0
    with pytest.raises(BadParam):
        trex(**dict(args, q=1.0))
    with pytest.raises(BadParam):
        trex(**args, s=0.5)


def test_trex_s1_is_the_affine_perspective(rng):
    L = rng.standard_normal((2, 3))
    r, u = rng.standard_normal(2), rng.standard_normal(3)
    w = np.array([0.5, 2.0])
    h = trex(L, r, u, 0.3, 2.5, 1.0, w)
    f = affine_perspective(catalog.make_weighted_norm_power(w, 2.5), AffineMap(L, r, u, 0.3),
                           h.inner.witness)
    for _ in range(500):
        x = 2 * rng.standard_normal(3)
        a, b = h(x), f(x)
        assert a == b or abs(a - b) <= 1e-12 * abs(b)


def test_expectation_perspective():
    assert expectation_perspective([0.5, 0.5], SQ1, [2, 0]) == 2
    assert expectation_perspective([0.5, 0.5], catalog.make_entropy(), [1, 1]) == 0
    assert expectation_perspective([0.5, 0.5], SQ1, [1, -1]) == INF
    with pytest.raises(BadWeights):
        expectation_perspective([0.5, 0.6], SQ1, [1, 1])


def test_marginal():
    assert marginal(Perspective(SQ1), IntervalK(1, 2), [4]) == pytest.approx(8, rel=1e-9)
    assert marginal(Perspective(SQ1), IntervalK(0, 1), [0]) == 0
    with pytest.raises(AllInfinite):
        marginal(Perspective(catalog.make_log_barrier(2.0)), IntervalK(0, 1), [5.0])
    with pytest.raises(BadParam):
        IntervalK(2, 1)


def test_marginal_matches_dense_grid():
    P = Perspective(catalog.make_huber(1, 1.0))
    etas = np.arange(0, 10 + 5e-5, 1e-4)
    oracle = min(P.value(e, [3.0]) for e in etas)
    assert abs(marginal(P, IntervalK(0, 10), [3.0]) - oracle) <= 1e-6


def test_marginal_is_convex_in_y():
    P = Perspective(catalog.make_berhu(1, 1.0))
    K = IntervalK(0.5, 3)

    def sampler(rng, budget):
        budget[0] -= 1
        return 4 * rng.standard_normal(1)

    report = convexity_chord_check(lambda y: marginal(P, K, y), sampler, trials=200, seed=3)
    assert report.passed, report.failures[:3]


def test_constrained_perspective():
    assert constrained_perspective(SQ1, 1.0, 2, [1]) == 0.5
    assert constrained_perspective(SQ1, 1.0, 1, [2]) == INF
    assert constrained_perspective(SQ1, 1.0, 0, [0]) == 0


def test_generalized_huber():
    assert generalized_huber_perspective(1.0, 2, [3]) == 2
    assert generalized_huber_perspective(1.0, 2, [1]) == 0.25
    assert generalized_huber_perspective(1.0, 0, [4]) == 4


def test_generalized_huber_matches_huber_perspective(rng):
    for rho, n in [(1.0, 1), (0.7, 2), (2.5, 3)]:
        P = Perspective(catalog.make_huber(n, rho))
        for _ in range(3500):
            eta = rng.choice([0.0, -rng.uniform(0, 2), rng.uniform(0, 4)], p=[0.1, 0.1, 0.8])
            y = 3 * rng.standard_normal(n)
            a, b = generalized_huber_perspective(rho, eta, y), P.value(eta, y)
            assert a == b or abs(a - b) <= 1e-12 * max(abs(a), abs(b))


@pytest.mark.parametrize("name", list(check_entries()))
def test_calculus_identities(name):
    for report in calculus_checks(name, check_entries()[name], trials=300, seed=7):
        assert report.passed, (report.name, report.failures[:3])
