import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linserre.errors import ConfigurationError, ContractError
from linserre.operators import (
    build_reference_operators,
    lagrange_derivative_matrix,
    sbp_identity_check,
    sbp_residual,
    to_physical,
    truncation_probe,
)
from linserre.quadrature import lgl_rule


def test_p1_derivative_by_hand():
    ref = build_reference_operators(1)
    np.testing.assert_allclose(ref.D, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)


def test_derivative_matches_polynomial_fit():
    # oracle: differentiate the interpolating polynomial with numpy
    rule = lgl_rule(5)
    Dl = lagrange_derivative_matrix(rule)
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        coef = np.polynomial.polynomial.polyfit(rule.nodes, e, 5)
        expect = np.polynomial.polynomial.polyval(rule.nodes, np.polynomial.polynomial.polyder(coef))
        np.testing.assert_allclose(Dl[:, j], expect, atol=1e-10)


@pytest.mark.parametrize("P", range(1, 9))
def test_sbp_property(P):
    ref = build_reference_operators(P)
    assert sbp_residual(ref) <= 1e-13
    np.testing.assert_allclose(ref.B, np.diag([-1.0] + [0.0] * (P - 1) + [1.0]))


def test_identity_scaling():
    ref = build_reference_operators(3)
    phys = to_physical(ref, 2.0)
    np.testing.assert_array_equal(phys.D, ref.D)
    np.testing.assert_array_equal(phys.M, ref.M)


def test_physical_sbp():
    assert sbp_residual(to_physical(build_reference_operators(4), 0.1)) <= 1e-13


def test_constants_in_kernel():
    phys = to_physical(build_reference_operators(4), 0.5)
    np.testing.assert_allclose(phys.D @ np.ones(5), 0.0, atol=1e-13)


@pytest.mark.parametrize("dx", [0.0, -1.0])
def test_nonpositive_length(dx):
    with pytest.raises(ConfigurationError):
        to_physical(build_reference_operators(2), dx)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_identity_on_constants(order):
    phys = to_physical(build_reference_operators(4), 0.3)
    assert sbp_identity_check(phys, np.ones(5), np.ones(5), order) == pytest.approx(0.0, abs=1e-12)


def test_first_order_identity_on_linear_function():
    ref = build_reference_operators(4)
    phys = to_physical(ref, 2.0)
    u = ref.rule.nodes.copy()
    lhs = float(u @ phys.M @ (phys.D @ u))
    assert lhs == pytest.approx(0.5 * (u[-1] ** 2 - u[0] ** 2), abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.floats(0.01, 10.0), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_identities_random(P, dx, order, seed):
    rng = np.random.default_rng(seed)
    phys = to_physical(build_reference_operators(P), dx)
    u, v = rng.standard_normal((2, P + 1))
    scale = (1.0 / dx) ** (order - 1) * 10 ** (order)  # terms grow like (P^2/dx)^(order-1)
    assert sbp_identity_check(phys, u, v, order) <= 1e-11 * max(1.0, scale * P ** (2 * order))


def test_third_order_identity_p4():
    rng = np.random.default_rng(7)
    phys = to_physical(build_reference_operators(4), 2.0)
    for _ in range(20):
        u, v = rng.standard_normal((2, 5))
        assert sbp_identity_check(phys, u, v, 3) <= 1e-11


def test_identity_contract():
    phys = to_physical(build_reference_operators(2), 1.0)
    with pytest.raises(ContractError):
        sbp_identity_check(phys, np.ones(2), np.ones(3), 1)
    with pytest.raises(ContractError):
        sbp_identity_check(phys, np.ones(3), np.ones(3), 4)


def test_exact_on_low_degree_polynomials():
    ref = build_reference_operators(4)
    f = lambda x: 1 + 2 * x - x**2 + x**3  # noqa: E731
    assert truncation_probe(ref, f, lambda x: 2 - 2 * x + 3 * x**2, 1, 0.5) == math.inf


@pytest.mark.parametrize("order, dl, expect", [
    (1, np.cos, 4.0),
    (3, lambda x: -np.cos(x), 2.0),
])
def test_truncation_order_sin(order, dl, expect):
    ref = build_reference_operators(4)
    observed = truncation_probe(ref, np.sin, dl, order, 0.1, x0=0.3)
    assert observed == pytest.approx(expect, abs=0.3)
