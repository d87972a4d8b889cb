from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracflow.quadrature import MAX_DEGREE, gauss_legendre_01, map_to_physical, rule


def monomial_integral(a, b):
    return Fraction(factorial(a) * factorial(b), factorial(a + b + 2))


@pytest.mark.parametrize("degree", range(MAX_DEGREE + 1))
def test_rule_structure(degree):
    qr = rule(degree)
    assert qr.weights.sum() == pytest.approx(0.5, abs=1e-14)
    assert np.all(qr.weights > 0)
    np.testing.assert_allclose(qr.points.sum(axis=1), 1.0, atol=1e-15)
    assert np.all(qr.points >= 0) and np.all(qr.points <= 1)


def test_exactness_sweep():
    for degree in range(MAX_DEGREE + 1):
        qr = rule(degree)
        x, y = qr.xy[:, 0], qr.xy[:, 1]
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                exact = float(monomial_integral(a, b))
                got = qr.weights @ (x**a * y**b)
                assert got == pytest.approx(exact, rel=1e-13, abs=1e-16), (degree, a, b)


@given(st.integers(0, MAX_DEGREE), st.data())
@settings(max_examples=60, deadline=None)
def test_exactness_property(degree, data):
    a = data.draw(st.integers(0, degree))
    b = data.draw(st.integers(0, degree - a))
    qr = rule(degree)
    got = qr.weights @ (qr.xy[:, 0] ** a * qr.xy[:, 1] ** b)
    assert got == pytest.approx(float(monomial_integral(a, b)), rel=1e-13, abs=1e-16)


def test_known_values():
    qr = rule(1)
    assert qr.weights.sum() == pytest.approx(0.5)
    for d in (3, 5, 8):
        q = rule(d)
        assert q.weights @ (q.xy[:, 0] ** 2 * q.xy[:, 1]) == pytest.approx(1 / 60, abs=1e-15)
    q = rule(5)
    assert q.weights @ q.xy[:, 0] ** 5 == pytest.approx(1 / 42, abs=1e-15)


def test_rejects_out_of_range():
    for d in (-1, MAX_DEGREE + 1):
        with pytest.raises(ValueError):
            rule(d)


def test_map_to_physical():
    qr = rule(4)
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pts, w = map_to_physical(qr, ref)
    np.testing.assert_allclose(pts, qr.xy)
    np.testing.assert_allclose(w, qr.weights)
    assert w @ pts[:, 0] == pytest.approx(1 / 6)

    small = np.array([[0.0, 0.0], [0.25, 0.0], [0.25, 0.25]])
    _, w = map_to_physical(qr, small)
    assert w.sum() == pytest.approx(1 / 32)
    with pytest.raises(ValueError):
        map_to_physical(qr, [[0, 0], [1, 1], [2, 2]])


def test_gauss_legendre_01():
    x, w = gauss_legendre_01(3)
    assert w.sum() == pytest.approx(1.0)
    assert w @ x**5 == pytest.approx(1 / 6)
