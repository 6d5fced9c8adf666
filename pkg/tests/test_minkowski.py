import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullgeo.minkowski import CausalClass, causal_character, minkowski_inner, quadric_residual

vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4).map(np.array)


def test_inner_examples():
    assert minkowski_inner([1, 1, 0, 0], [1, 1, 0, 0]) == 0
    assert minkowski_inner([-0.25, 0.25, 0, 0], [2, 2, 0, 0]) == pytest.approx(1.0)
    assert minkowski_inner([0, -1, 0, 0], [0, -1, 0, 0]) == 1


def test_inner_length_mismatch():
    with pytest.raises(ValueError):
        minkowski_inner([1, 0, 0], [1, 0, 0, 0])


def test_causal_examples():
    assert causal_character([-1, 0, 0, 0]) is CausalClass.TIMELIKE
    assert causal_character([2, 2, 0, 0]) is CausalClass.NULL
    assert causal_character([0, 0, 2, 0]) is CausalClass.SPACELIKE
    assert causal_character([0, 0, 0, 0]) is CausalClass.ZERO


def test_quadric_examples():
    c = np.array([2.0, 0, 0, 0])
    assert quadric_residual([2, 4, 0, 0], c, "sphere", 16) == 0
    assert quadric_residual(c, c, "sphere", 4) == -4
    assert quadric_residual([3, 0, 0, 0], c, "hyperbolic", 1) == 0
    with pytest.raises(ValueError):
        quadric_residual(c, c, "sphere", 0.0)


@settings(max_examples=80, deadline=None)
@given(vec, vec, vec, st.floats(-3, 3), st.floats(-3, 3))
def test_bilinear_symmetric(x, y, z, a, b):
    lhs = minkowski_inner(a * x + b * y, z)
    rhs = a * minkowski_inner(x, z) + b * minkowski_inner(y, z)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))
    assert minkowski_inner(x, y) == minkowski_inner(y, x)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_normal_norm_is_2ab(a, b):
    xi = np.array([2.0, 2.0, 0, 0])
    N = np.array([-0.25, 0.25, 0, 0])
    V = a * xi + b * N
    assert minkowski_inner(V, V) == pytest.approx(2 * a * b, abs=1e-12)
