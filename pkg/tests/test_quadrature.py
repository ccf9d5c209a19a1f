import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre as npleg

from linserre.errors import ConfigurationError
from linserre.quadrature import MAX_DEGREE, lagrange_eval, lagrange_matrix, legendre, lgl_rule


def moment_weights(nodes):
    """Weights from the moment equations sum_j w_j x_j^k = int x^k, k = 0..P."""
    k = np.arange(len(nodes))
    V = nodes[None, :] ** k[:, None]
    moments = np.where(k % 2 == 0, 2.0 / (k + 1), 0.0)
    return np.linalg.solve(V, moments)


def bisect(f, a, b, tol=1e-15):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
        if b - a < tol:
            break
    return 0.5 * (a + b)


def test_p1_endpoints_only():
    r = lgl_rule(1)
    np.testing.assert_allclose(r.nodes, [-1.0, 1.0])
    np.testing.assert_allclose(r.weights, [1.0, 1.0])


def test_p2_weights_match_moment_solve():
    r = lgl_rule(2)
    np.testing.assert_allclose(r.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(r.weights, moment_weights(np.array([-1.0, 0.0, 1.0])), atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-15)


def test_p4_interior_nodes_by_bisection():
    dl4 = npleg.Legendre.basis(4).deriv()
    root = bisect(dl4, 0.3, 0.9)
    assert root == pytest.approx(math.sqrt(3 / 7), abs=1e-14)
    r = lgl_rule(4)
    np.testing.assert_allclose(r.nodes, [-1, -root, 0, root, 1], atol=1e-14)


@pytest.mark.parametrize("P", [1, 2, 3, 5, 8, 13, 20])
def test_weights_match_moment_solve(P):
    r = lgl_rule(P)
    if P <= 12:  # Vandermonde solve is only trustworthy at modest size
        np.testing.assert_allclose(r.weights, moment_weights(r.nodes), atol=1e-11)
    # closed form 2 / (P (P+1) L_P(x)^2) evaluated with numpy's Legendre
    LP = npleg.legval(r.nodes, [0] * P + [1])
    np.testing.assert_allclose(r.weights, 2.0 / (P * (P + 1) * LP**2), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, MAX_DEGREE))
def test_rule_structure(P):
    r = lgl_rule(P)
    assert r.npoints == P + 1
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] == -1.0 and r.nodes[-1] == 1.0
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(2.0, abs=1e-13)
    np.testing.assert_allclose(r.nodes, -r.nodes[::-1], atol=1e-15)
    np.testing.assert_allclose(r.weights, r.weights[::-1], rtol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 16), st.data())
def test_exact_to_degree_2p_minus_1(P, data):
    k = data.draw(st.integers(0, 2 * P - 1))
    r = lgl_rule(P)
    exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
    assert np.dot(r.weights, r.nodes**k) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("P", [0, -1, MAX_DEGREE + 1])
def test_degree_out_of_range(P):
    with pytest.raises(ConfigurationError):
        lgl_rule(P)


def test_arrays_read_only():
    r = lgl_rule(3)
    with pytest.raises(ValueError):
        r.nodes[0] = 0.0


def test_legendre_against_numpy():
    x = np.linspace(-1, 1, 11)
    for n in range(6):
        L, dL = legendre(n, x)
        c = [0] * n + [1]
        np.testing.assert_allclose(L, npleg.legval(x, c), atol=1e-14)
        np.testing.assert_allclose(dL, npleg.legval(x, npleg.legder(c)), atol=1e-13)


# cardinal functions; indices are 0-based
def test_cardinality_at_nodes():
    r = lgl_rule(2)
    assert lagrange_eval(r, 1, 0.0) == 1.0
    assert lagrange_eval(r, 0, 0.0) == 0.0


def test_middle_cardinal_is_one_minus_x_squared():
    r = lgl_rule(2)
    assert lagrange_eval(r, 1, 0.5) == pytest.approx(0.75, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.floats(-1, 1))
def test_partition_of_unity(P, x):
    r = lgl_rule(P)
    vals = lagrange_matrix(r, np.array([x]))
    assert vals.sum() == pytest.approx(1.0, abs=1e-12)


def test_interpolates_polynomials_exactly():
    r = lgl_rule(5)
    x = np.linspace(-1, 1, 17)
    f = lambda s: 3 * s**5 - s**2 + 0.5  # noqa: E731
    np.testing.assert_allclose(lagrange_matrix(r, x) @ f(r.nodes), f(x), atol=1e-13)
