import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullgeo import jetcalc as jc
from nullgeo.jetcalc import DiffScalar, FieldHandle, directional_derivative, lift

finite = st.floats(-3.0, 3.0, allow_nan=False)


def test_lift_square():
    x = lift(3.0, 0, 1)
    assert (x * x).derivative(1) == 6.0


def test_sin_second_derivative_at_zero():
    x = lift(0.0, 0, 2)
    assert jc.sin(x).derivative(1, 1) == 0.0


def test_exp_third_derivative():
    x = lift(1.0, 0, 3)
    assert jc.exp(x).derivative(1, 1, 1) == pytest.approx(math.e, rel=1e-15)


def test_lift_rejects_bad_depth():
    with pytest.raises(ValueError):
        lift(1.0, 0, 4)
    with pytest.raises(ValueError):
        lift(1.0, 0, -1)


def test_depth_zero_is_plain_real():
    x = DiffScalar(2.5)
    y = x * x + 1.0 / x - 3.0
    assert y.value == 2.5 * 2.5 + 1 / 2.5 - 3.0
    assert y.depth == 0


def test_lift_then_value_is_identity():
    for d in range(4):
        assert lift(0.7, 0, d).value == 0.7


def test_mixing_depths_is_rejected():
    with pytest.raises(ValueError):
        lift(1.0, 0, 1) + lift(1.0, 0, 2)


def test_directional_two_outputs():
    f = FieldHandle(2, 2, lambda u, v: [u * v, u + v])
    np.testing.assert_allclose(directional_derivative(f, [2.0, 3.0], [1.0, 0.0], 1), [3.0, 1.0])


def test_directional_cube_third():
    f = FieldHandle(1, 1, lambda u: [u * u * u])
    assert directional_derivative(f, [2.0], [1.0], 3)[0] == pytest.approx(6.0, abs=1e-13)


def test_directional_cone_component(cone):
    d = directional_derivative(cone.chart.F, [2.0, np.pi / 2, 0.0], [0, 1, 0], 2)
    assert d[1] == pytest.approx(-2.0, abs=1e-14)


def test_order_above_three_rejected():
    f = FieldHandle(1, 1, lambda u: [u])
    with pytest.raises(ValueError):
        directional_derivative(f, [0.0], [1.0], 4)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4), finite, finite)
def test_cubic_polynomials_exact(coef, x, _):
    a, b, c, d = coef
    f = FieldHandle(1, 1, lambda u: [a + b * u + c * u * u + d * u * u * u])
    exact = [b + 2 * c * x + 3 * d * x * x, 2 * c + 6 * d * x, 6 * d]
    for k in (1, 2, 3):
        got = directional_derivative(f, [x], [1.0], k)[0]
        assert abs(got - exact[k - 1]) <= 1e-13 * max(1.0, abs(exact[k - 1]))


@settings(max_examples=40, deadline=None)
@given(finite, finite, finite, finite)
def test_mixed_partials_commute(x, y, w1, w2):
    f = lambda u, v: jc.sin(u * v) + jc.exp(0.3 * u) * v * v
    p = jc.DiffScalar(np.array([x, y]))
    q = jc.extend(jc.extend(p, [[1.0, 0.0]]), [[w1, w2]])
    r = jc.extend(jc.extend(p, [[w1, w2]]), [[1.0, 0.0]])
    a = f(q[0], q[1]).derivative(1, 1)
    b = f(r[0], r[1]).derivative(1, 1)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), finite)
def test_product_and_chain_rules(x, y):
    u = lift(x, 0, 1)
    g = jc.log(u) * jc.cos(u * y)
    exact = math.cos(x * y) / x - math.log(x) * math.sin(x * y) * y
    assert g.derivative(1) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_sqrt_power_reciprocal():
    u = lift(4.0, 0, 2)
    assert jc.sqrt(u).derivative(1) == pytest.approx(0.25)
    assert jc.sqrt(u).derivative(1, 1) == pytest.approx(-1 / 32)
    assert jc.power(u, 3).derivative(1, 1) == pytest.approx(24.0)
    assert (1.0 / u).derivative(1) == pytest.approx(-1 / 16)


def test_solve_matches_numpy_and_differentiates():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    b = rng.normal(size=4)
    x = jc.solve(DiffScalar(A), DiffScalar(b))
    np.testing.assert_allclose(x.value, np.linalg.solve(A, b), rtol=1e-13)
    # d/ds of A(s)^-1 b with A(s) = A + s E
    E = rng.normal(size=(4, 4))
    s = lift(0.0, 0, 1)
    As = jc.stack([jc.stack([s * E[i, j] + A[i, j] for j in range(4)]) for i in range(4)])
    xs = jc.solve(As, jc.as_diff(b, s))
    Ainv = np.linalg.inv(A)
    np.testing.assert_allclose(xs.derivative(1), -Ainv @ E @ Ainv @ b, rtol=1e-11)


def test_solve_singular():
    with pytest.raises(np.linalg.LinAlgError):
        jc.solve(DiffScalar(np.ones((2, 2))), DiffScalar(np.ones(2)))


def test_evaluator_is_deterministic(cone):
    q = jc.lift_point([1.3, 0.8, 2.0], 2)
    a, b = cone.chart.F(q), cone.chart.F(q)
    assert np.array_equal(a.c, b.c)
