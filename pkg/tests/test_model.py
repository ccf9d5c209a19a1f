import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linserre.errors import ConfigurationError
from linserre.model import (
    InflowOutflowCoefficients,
    PhysicalParams,
    boundary_matrix,
    boundary_term,
    check_case1,
    check_case2,
    continuous_energy,
    eigenvalues,
    flux_h,
    flux_u,
    gaussian_ic,
    outflow_matrix,
    symmetric_eigvals3,
    traveling_wave,
    traveling_wave_trace,
    w_transform,
)

params_st = st.builds(
    PhysicalParams,
    g=st.floats(0.1, 20.0),
    H=st.floats(0.1, 5.0),
    U=st.floats(-2.0, 2.0),
)


def test_fluxes():
    p = PhysicalParams(U=0.2)
    assert flux_h(0.0, 0.0, p) == 0.0 and flux_u(0.0, 0.0, 0.0, 0.0, p) == 0.0
    assert flux_h(1.0, 0.0, p) == pytest.approx(0.2)


@settings(max_examples=50)
@given(params_st, st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_fluxes_random(p, v):
    h, u, uxx, uxt = v
    assert flux_h(h, u, p) == pytest.approx(h * p.U + u * p.H)
    expect = p.g * h + p.U * u - p.H * p.H * p.U * uxx / 3 - p.H * p.H * uxt / 3
    assert flux_u(h, u, uxx, uxt, p) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_boundary_term_examples():
    p = PhysicalParams()
    assert boundary_term(np.zeros(5), p) == 0.0
    assert boundary_term([1, 1, 0, 0, 0], p) == pytest.approx(-9.8)


@settings(max_examples=100)
@given(params_st, st.lists(st.floats(-10, 10), min_size=5, max_size=5))
def test_boundary_term_is_quadratic_form(p, v):
    v = np.array(v)
    A = boundary_matrix(p)
    np.testing.assert_allclose(A, A.T)
    assert boundary_term(v, p) == pytest.approx(v @ A @ v, rel=1e-10, abs=1e-10 * (1 + v @ v))


@settings(max_examples=100)
@given(params_st, st.lists(st.floats(-10, 10), min_size=5, max_size=5))
def test_eigen_decomposition_identity(p, v):
    v = np.array(v)
    w = w_transform(v, p)
    np.testing.assert_array_equal(w[:3], [v[3], v[2], v[0]])
    scale = max(1.0, p.g, p.H**3) * (p.H + abs(p.U) + 1)
    assert abs(v @ boundary_matrix(p) @ v - eigenvalues(p) @ w**2) <= 1e-10 * scale * (v @ v)


def test_w_of_zero():
    np.testing.assert_array_equal(w_transform(np.zeros(5), PhysicalParams(U=0.3)), np.zeros(5))


def test_eigenvalue_examples():
    np.testing.assert_allclose(eigenvalues(PhysicalParams(U=0.0)), [0, 0, 0, -1 / 6, 1 / 6], atol=1e-15)
    lam = eigenvalues(PhysicalParams(g=9.8, H=1.0, U=0.2))
    assert lam[1] == pytest.approx(-0.2 / 6)
    assert lam[2] == pytest.approx(-0.98)


@settings(max_examples=100)
@given(params_st)
def test_eigenvalue_signs(p):
    lam = eigenvalues(p)
    assert lam[0] == 0.0
    assert lam[3] < 0 < lam[4]
    if p.U > 0:
        assert lam[1] < 0 and lam[2] < 0
    elif p.U < 0:
        assert lam[1] > 0 and lam[2] > 0


@pytest.mark.parametrize("a, b, ok", [(1, 1, True), (0, 0, True), (1.5, 0, False), (0, -1.01, False)])
def test_case1(a, b, ok):
    assert check_case1(a, b) is ok


@settings(max_examples=100)
@given(st.floats(0.1, 20.0), st.floats(0.1, 5.0), st.floats(1e-3, 2.0))
def test_case2_accepts_dirichlet_choice(g, H, U):
    p = PhysicalParams(g=g, H=H, U=U)
    assert check_case2(InflowOutflowCoefficients.dirichlet(p), p)
    assert check_case2(InflowOutflowCoefficients(), p)


def test_case2_rejects_large_outflow_coefficient():
    p = PhysicalParams(U=0.2)
    lam = eigenvalues(p)
    flip = math.sqrt(-lam[3] / lam[4])  # diagonal entry lambda4 + b^2 lambda5 changes sign
    assert check_case2(InflowOutflowCoefficients(beta4=0.99 * flip), p)
    assert not check_case2(InflowOutflowCoefficients(beta4=1.01 * flip), p)


def test_case2_requires_positive_mean_flow():
    with pytest.raises(ConfigurationError):
        check_case2(InflowOutflowCoefficients(), PhysicalParams(U=0.0))


@settings(max_examples=60)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_symmetric_eigvals_match_numpy(v):
    R = np.array([[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]])
    # the trigonometric cubic solution loses half the digits near repeated roots
    tol = 1e-7 * max(1.0, np.abs(R).max())
    np.testing.assert_allclose(symmetric_eigvals3(R), np.linalg.eigvalsh(R), atol=tol)


def test_outflow_matrix_diagonal_without_coupling():
    p = PhysicalParams(U=0.2)
    np.testing.assert_allclose(outflow_matrix(InflowOutflowCoefficients(), p), np.diag(eigenvalues(p)[1:4]))


@pytest.mark.parametrize("U, omega", [(0.0, 10.70514), (0.2, 17.99074)])
def test_wave_number(U, omega):
    assert PhysicalParams(U=U, c=0.5).omega == pytest.approx(omega, abs=5e-6)


@pytest.mark.parametrize("c", [0.0, -0.1, 3.2])
def test_wave_speed_range(c):
    with pytest.raises(ConfigurationError):
        PhysicalParams(c=c)


def test_wave_initial_condition():
    p = PhysicalParams(U=0.2, c=0.5)
    x = np.linspace(0, 1, 7)
    h, u = traveling_wave(p, x, 0.0)
    np.testing.assert_allclose(h, 1 + (1 + np.sin(p.omega * x)) / p.omega)
    np.testing.assert_allclose(u, 0.2 + 0.3 / p.omega * np.sin(p.omega * x))


@pytest.mark.parametrize("U", [0.0, 0.2])
def test_wave_solves_the_equations(U):
    # central differences in x and t as an independent check of the PDE residual
    p = PhysicalParams(U=U, c=0.5)
    x, t, e = np.linspace(0.1, 0.5, 9), 0.03, 1e-3
    f = lambda xx, tt: traveling_wave(p, xx, tt)  # noqa: E731
    h_t = (f(x, t + e)[0] - f(x, t - e)[0]) / (2 * e)
    u_t = (f(x, t + e)[1] - f(x, t - e)[1]) / (2 * e)
    tr = traveling_wave_trace(p, x, t)
    h_x = (f(x + e, t)[0] - f(x - e, t)[0]) / (2 * e)
    np.testing.assert_allclose(u_t, tr.u_t, atol=1e-5)
    # h_t + H u_x + U h_x = 0
    assert np.max(np.abs(h_t + p.H * tr.u_x + U * h_x)) < 1e-4
    # (1 - H^2/3 d_xx) u_t + U u_x - U H^2/3 u_xxx + g h_x = 0 via derivatives of u_xt, u_xx
    uxxt = (traveling_wave_trace(p, x + e, t).u_xt - traveling_wave_trace(p, x - e, t).u_xt) / (2 * e)
    uxxx = (traveling_wave_trace(p, x + e, t).u_xx - traveling_wave_trace(p, x - e, t).u_xx) / (2 * e)
    res = tr.u_t - p.H**2 / 3 * uxxt + U * tr.u_x - U * p.H**2 / 3 * uxxx + p.g * h_x
    assert np.max(np.abs(res)) < 1e-3


def test_gaussian():
    h, u = gaussian_ic(np.array([0.0, -5.0, 5.0]))
    assert h[0] == 0.2
    assert np.all(h[1:] <= 1e-200)
    np.testing.assert_array_equal(u, 0.0)


def test_continuous_energy():
    w = np.full(11, 0.1)
    assert continuous_energy(np.zeros(11), np.zeros(11), np.zeros(11), PhysicalParams(), w) == 0.0
    assert continuous_energy(np.ones(11), np.zeros(11), np.zeros(11), PhysicalParams(), w) == pytest.approx(
        0.5 * 9.8 * 1.1
    )
