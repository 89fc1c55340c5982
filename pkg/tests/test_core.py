import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from perspectra.core import (INF, Ball, BadParam, BadScale, ConvexFunction, Flags,
                             FlagViolation, IndeterminateSum, NoWitness, as_vector,
                             euclidean_norm, ext_add, ext_scale, ext_sum)

ext = st.one_of(st.floats(-1e100, 1e100), st.just(INF))


def test_ext_add_examples():
    assert ext_add(2, 3) == 5
    assert ext_add(2, INF) == INF
    with pytest.raises(IndeterminateSum):
        ext_add(INF, -INF)


def test_nan_rejected():
    with pytest.raises(IndeterminateSum):
        ext_add(float("nan"), 1.0)


@given(ext, ext)
def test_ext_add_commutes(a, b):
    assert ext_add(a, b) == ext_add(b, a)


@given(ext, ext, ext)
def test_ext_sum_is_order_free(a, b, c):
    # exact rounding makes the sum independent of grouping
    assert ext_sum([a, b, c]) == ext_sum([c, a, b])


def test_ext_sum_is_exactly_rounded():
    assert ext_sum([1e16, 1.0, -1e16]) == 1.0
    with pytest.raises(IndeterminateSum):
        ext_sum([INF, 1.0, -INF])


def test_ext_scale():
    assert ext_scale(2, 3) == 6
    assert ext_scale(2, INF) == INF
    for lam in (0, -1, INF):
        with pytest.raises(BadScale):
            ext_scale(lam, 5)


def test_euclidean_norm_examples():
    assert euclidean_norm([3, 4]) == 5
    assert euclidean_norm([0, 0]) == 0
    assert euclidean_norm([1]) == 1


def test_triangle_inequality(rng):
    for _ in range(1000):
        a, b = rng.standard_normal(4) * 10, rng.standard_normal(4) * 10
        lhs = euclidean_norm(a + b)
        rhs = euclidean_norm(a) + euclidean_norm(b)
        assert lhs <= rhs * (1 + 1e-12)


def test_as_vector_validation():
    assert as_vector(3.0).shape == (1,)
    with pytest.raises(BadParam):
        as_vector([1.0, np.nan])
    with pytest.raises(BadParam):
        as_vector([1.0, 2.0], 3)
    with pytest.raises(BadParam):
        as_vector([[1.0]])


def test_ball(rng):
    B = Ball(np.zeros(2), 1.0)
    assert B.contains([0.6, 0.8])
    assert not B.contains([1.0, 1.0])
    assert all(B.contains(u) for u in B.sample(rng, 50))


def test_witness_must_be_in_domain():
    f = lambda y: INF if y[0] < 0 else y[0]
    ConvexFunction(1, f, [1.0])
    with pytest.raises(NoWitness):
        ConvexFunction(1, f, [-1.0])


def test_supercoercive_flag_needs_indicator_recession():
    with pytest.raises(FlagViolation):
        ConvexFunction(1, lambda y: y[0] ** 2, [0.0], recession=lambda y: abs(y[0]),
                       flags=Flags(supercoercive=True))


def test_call_rejects_bad_input():
    f = ConvexFunction(2, lambda y: float(y @ y), [0.0, 0.0])
    assert f([1.0, 2.0]) == 5.0
    with pytest.raises(BadParam):
        f([1.0])
