import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from perspectra import catalog
from perspectra.core import INF, ConvexFunction, MissingOracle, NoWitness, NotConverged, Unsupported
from perspectra.perspective import (ConjugateSet, ExposedRaySet, Perspective, PerspectivePoint,
                                    SubgradientPair, conjugate_membership, perspective_subdifferential,
                                    perspective_value, recession_value)
from perspectra.verify import check_entries

SQ = catalog.make_norm_power(1, 2.0)


def test_values():
    P = Perspective(SQ)
    assert perspective_value(P, PerspectivePoint(2, [4])) == 8
    assert P.value(0, [0]) == 0
    assert P.value(-1, [1]) == INF
    assert Perspective(catalog.make_huber(1, 1.0)).value(2, [3]) == 2
    assert Perspective(catalog.make_berhu(1, 1.0)).value(1, [2]) == 2.5


def test_recession_values():
    assert recession_value(Perspective(catalog.make_norm_power(2, 1.0)), [3, 4]) == 5
    assert recession_value(Perspective(catalog.make_norm_power(2, 2.0)), [1, 0]) == INF
    assert recession_value(Perspective(catalog.make_vapnik(2, 1.0)), [0, 2]) == 2


def _numeric(phi):
    return Perspective(phi, recession_mode="numeric")


def test_numeric_recession():
    assert _numeric(catalog.make_norm_power(2, 1.0)).recession([3, 4]) == pytest.approx(5, rel=1e-12)
    assert _numeric(catalog.make_norm_power(2, 3.0)).recession([1, 0]) == INF
    assert _numeric(catalog.make_vapnik(2, 1.0)).recession([0, 2]) == pytest.approx(2, rel=1e-8)
    assert _numeric(catalog.make_huber(1, 1.0)).recession([0.0]) == 0


def test_numeric_recession_not_converged():
    # both quotients grow without bound but stay below the divergence threshold
    with pytest.raises(NotConverged):
        _numeric(catalog.make_entropy()).recession([1.0])
    with pytest.raises(NotConverged):
        _numeric(catalog.make_norm_power(2, 2.0)).recession([1, 0])


def test_numeric_recession_needs_a_witness():
    f = ConvexFunction(1, lambda y: INF if y[0] < 0 else y[0], [1.0])
    with pytest.raises(NoWitness):
        Perspective(f, recession_mode="numeric", witness=[-1.0])
    with pytest.raises(MissingOracle):
        Perspective(f, recession_mode="closed")
    assert Perspective(f).recession([2.0]) == pytest.approx(2.0)


def test_subdifferential_examples():
    P = Perspective(SQ)
    S = perspective_subdifferential(P, PerspectivePoint(1, [1]))
    (pair,) = list(S)
    assert pair.mu == -1 and np.array_equal(pair.u, [2])
    assert P.subdifferential(0, [1]).is_empty
    assert P.subdifferential(-1, [0]).is_empty
    assert isinstance(P.subdifferential(0, [0]), ConjugateSet)


def test_subdifferential_needs_support_data():
    bare = ConvexFunction(1, lambda y: abs(float(y[0])), [0.0], recession=lambda y: abs(float(y[0])),
                          conjugate=lambda u: 0.0 if abs(u[0]) <= 1 else INF)
    with pytest.raises(Unsupported):
        Perspective(bare).subdifferential(0, [1.0])
    with pytest.raises(MissingOracle):
        Perspective(catalog.make_fair(1.0, 1.0)).subdifferential(0, [1.0])
    P = Perspective(catalog.make_huber(2, 1.0))
    S = P.subdifferential(0, [3.0, 4.0])
    assert isinstance(S, ExposedRaySet)
    assert np.allclose(S.points[0], [0.6, 0.8])
    f = ConvexFunction(1, lambda y: float(y[0] ** 2), [0.0])
    with pytest.raises(MissingOracle):
        Perspective(f, recession_mode="numeric").subdifferential(1, [1])


def test_conjugate_membership():
    P = Perspective(SQ)
    assert conjugate_membership(P, SubgradientPair(-1, [2]))
    assert not conjugate_membership(P, SubgradientPair(0, [2]))
    assert conjugate_membership(P, SubgradientPair(-5, [0]))


def _finite_points(P, rng, k, positive=False):
    out = []
    while len(out) < k:
        eta = rng.uniform(0.05, 4) if positive or rng.uniform() < 0.8 else 0.0
        y = 2 * rng.standard_normal(P.dim)
        if P.value(eta, y) < INF:
            out.append((eta, y))
    return out


@pytest.mark.parametrize("name", list(check_entries()))
def test_base_consistency(name, rng):
    phi = check_entries()[name]
    P = Perspective(phi)
    for _ in range(200):
        y = 2 * rng.standard_normal(phi.dim)
        assert P.value(1.0, y) == phi.value(y)


@pytest.mark.parametrize("name", ["norm_pow(p=2)", "norm_pow(p=1)", "huber", "berhu",
                                  "vapnik", "entropy", "fair(p=2)"])
def test_subgradient_inequality(name, rng):
    P = Perspective(check_entries()[name])
    probes = _finite_points(P, rng, 100)
    for eta, y in _finite_points(P, rng, 20, positive=True):
        val = P.value(eta, y)
        for pair in P.subdifferential(eta, y).sample(rng, 3):
            for e2, y2 in probes:
                rhs = val + pair.mu * (e2 - eta) + float(pair.u @ (y2 - y))
                assert P.value(e2, y2) >= rhs - 1e-9


def test_conjugate_set_samples_are_members(rng):
    for name in ("norm_pow(p=2)", "huber", "entropy"):
        P = Perspective(check_entries()[name])
        S = P.subdifferential(0, np.zeros(P.dim))
        pairs = S.sample(rng, 5)
        assert pairs
        assert all(S.contains(p) for p in pairs)


@given(st.floats(0.01, 10), st.floats(0, 5), st.floats(-5, 5))
def test_homogeneity_of_berhu(lam, eta, y):
    P = Perspective(catalog.make_berhu(1, 1.0))
    a, b = P.value(lam * eta, [lam * y]), lam * P.value(eta, [y])
    if b == INF:
        assert a == INF
    else:
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def test_lsc_but_not_continuous():
    P = Perspective(catalog.make_norm_power(1, 2.0))
    vals = [P.value(a * a, [a]) for a in (2.0 ** -n for n in range(5, 30))]
    assert all(abs(v - 1) <= 1e-9 for v in vals)
    assert P.value(0, [0]) == 0 <= 1
