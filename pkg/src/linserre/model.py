"""Linearized Serre equations: parameters, fluxes, energy and boundary analysis.

The model, for perturbations ``h`` and ``u`` about depth ``H`` and velocity
``U``, is

    h_t + (U h + H u)_x = 0
    u_t + (g h + U u - H^2 U / 3 u_xx - H^2 / 3 u_xt)_x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from linserre.errors import ConfigurationError


@dataclass(frozen=True)
class PhysicalParams:
    g: float = 9.8
    H: float = 1.0
    U: float = 0.0
    #: phase speed of the traveling-wave solution, optional
    c: float | None = None

    def __post_init__(self) -> None:
        if not (self.g > 0 and math.isfinite(self.g)):
            raise ConfigurationError(f"g must be positive, got {self.g!r}")
        if not (self.H > 0 and math.isfinite(self.H)):
            raise ConfigurationError(f"H must be positive, got {self.H!r}")
        if not math.isfinite(self.U):
            raise ConfigurationError(f"U must be finite, got {self.U!r}")
        if self.c is not None:
            upper = self.U + math.sqrt(self.g * self.H)
            if not self.U < self.c < upper:
                raise ConfigurationError(
                    f"wave speed c={self.c!r} must satisfy U < c < U + sqrt(gH) "
                    f"= {upper:.6g}"
                )

    @property
    def omega(self) -> float:
        """Wavenumber of the traveling wave."""
        if self.c is None:
            raise ConfigurationError("wave speed c is required for omega")
        s = self.c - self.U
        return math.sqrt(3.0 * (self.g * self.H - s * s)) / (s * self.H)


# {{{ fluxes and energy


def flux_h(h, u, params: PhysicalParams):
    return params.U * h + params.H * u


def flux_u(h, u, u_xx, u_xt, params: PhysicalParams):
    g, H, U = params.g, params.H, params.U
    return g * h + U * u - H**2 * U / 3.0 * u_xx - H**2 / 3.0 * u_xt


def continuous_energy(h, u, u_x, params: PhysicalParams, weights) -> float:
    """Quasi-H^1 energy evaluated with nodal quadrature ``weights``."""
    w = np.asarray(weights)
    return float(
        0.5 * params.g * np.sum(w * np.square(h))
        + 0.5 * params.H * np.sum(w * np.square(u))
        + params.H**3 / 6.0 * np.sum(w * np.square(u_x))
    )


# }}}


# {{{ boundary term and its characteristic decomposition


def boundary_matrix(params: PhysicalParams) -> np.ndarray:
    """Symmetric ``A`` with ``BT = v^T A v``, ``v = [h, u, u_x, u_xx, u_xt]``."""
    g, H, U = params.g, params.H, params.U
    H3 = H**3
    return np.array(
        [
            [-g * U / 2, -g * H / 2, 0.0, 0.0, 0.0],
            [-g * H / 2, -H * U / 2, 0.0, H3 * U / 6, H3 / 6],
            [0.0, 0.0, -H3 * U / 6, 0.0, 0.0],
            [0.0, H3 * U / 6, 0.0, 0.0, 0.0],
            [0.0, H3 / 6, 0.0, 0.0, 0.0],
        ]
    )


def boundary_term(v, params: PhysicalParams) -> float:
    """Energy flux at a boundary point from the six-term expression."""
    h, u, ux, uxx, uxt = (float(a) for a in v)
    g, H, U = params.g, params.H, params.U
    return (
        -g * H * h * u
        - g * U / 2 * h * h
        - H * U / 2 * u * u
        - H**3 * U / 6 * ux * ux
        + H**3 * U / 3 * u * uxx
        + H**3 / 3 * u * uxt
    )


def c_plus_minus(params: PhysicalParams) -> tuple[float, float]:
    H, U = params.H, params.U
    s = math.sqrt(4 * H**4 + 9 * U**2)
    cp = math.sqrt(4 * H**4 + (3 * U + s) ** 2)
    cm = math.sqrt(4 * H**4 + (3 * U - s) ** 2)
    return cp, cm


def eigenvalues(params: PhysicalParams) -> np.ndarray:
    g, H, U = params.g, params.H, params.U
    s = math.sqrt(4 * H**4 + 9 * U**2)
    return np.array(
        [
            0.0,
            -(H**3) * U / 6,
            -g * U / 2,
            -H * U / 4 - H * s / 12,
            -H * U / 4 + H * s / 12,
        ]
    )


def w_transform(v, params: PhysicalParams) -> np.ndarray:
    """Characteristic combinations ``w`` with ``v^T A v = sum(lambda * w**2)``.

    ``v`` may carry extra trailing dimensions (one column per sample).
    """
    h, u, ux, uxx, uxt = np.asarray(v, dtype=np.float64)
    g, H, U = params.g, params.H, params.U
    s = math.sqrt(4 * H**4 + 9 * U**2)
    cp, cm = c_plus_minus(params)
    common = 2 * H**2 * U * uxx + 2 * H**2 * uxt - 6 * g * h
    return np.array(
        [
            uxx,
            ux,
            h,
            (common - (3 * U + s) * u) / cp,
            (common - (3 * U - s) * u) / cm,
        ]
    )


# }}}


# {{{ boundary condition validation


@dataclass(frozen=True)
class InflowOutflowCoefficients:
    """Coefficients of ``w_j(x_L) = a_j w_5(x_L)`` and
    ``w_5(x_R) = b_2 w_2 + b_3 w_3 + b_4 w_4`` for ``U > 0``."""

    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    beta4: float = 0.0

    @classmethod
    def dirichlet(cls, params: PhysicalParams) -> InflowOutflowCoefficients:
        """The choice that reduces to ``h = u = u_x = 0`` at the inflow
        and ``u = 0`` at the outflow."""
        cp, cm = c_plus_minus(params)
        return cls(alpha4=cm / cp, beta4=cp / cm)


def check_case1(alpha: float, beta: float) -> bool:
    """Sufficient condition for an energy estimate when ``U = 0``."""
    return -1.0 <= alpha <= 1.0 and -1.0 <= beta <= 1.0


def outflow_matrix(coeffs: InflowOutflowCoefficients, params: PhysicalParams) -> np.ndarray:
    _, l2, l3, l4, l5 = eigenvalues(params)
    b = np.array([coeffs.beta2, coeffs.beta3, coeffs.beta4])
    return np.diag([l2, l3, l4]) + l5 * np.outer(b, b)


def symmetric_eigvals3(R: np.ndarray) -> np.ndarray:
    """Eigenvalues of a real symmetric 3x3 matrix from the characteristic cubic.

    Accurate to about ``sqrt(eps) * |R|`` near repeated eigenvalues; diagonal
    input is returned exactly.
    """
    a = np.asarray(R, dtype=np.float64)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(a))

    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = np.clip(np.linalg.det(b) / 2.0, -1.0, 1.0)
    phi = math.acos(r) / 3.0

    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.sort([e1, e2, e3])


def check_case2(
    coeffs: InflowOutflowCoefficients, params: PhysicalParams, tol: float = 1.0e-12
) -> bool:
    """Sufficient conditions for an energy estimate when ``U > 0``:
    the outflow matrix is negative semidefinite and the inflow sum is
    nonnegative."""
    if not params.U > 0:
        raise ConfigurationError("inflow/outflow check requires U > 0")
    _, l2, l3, l4, l5 = eigenvalues(params)
    R = outflow_matrix(coeffs, params)
    scale = max(1.0, float(np.max(np.abs(R))))
    nsd = symmetric_eigvals3(R)[-1] <= tol * scale
    inflow = l2 * coeffs.alpha2**2 + l3 * coeffs.alpha3**2 + l4 * coeffs.alpha4**2 + l5
    return bool(nsd and inflow >= -tol * max(1.0, abs(l4) * coeffs.alpha4**2))


# }}}


# {{{ analytic data


@dataclass(frozen=True)
class WaveTrace:
    """Exact traveling-wave values and derivatives at given points."""

    h: np.ndarray
    u: np.ndarray
    u_x: np.ndarray
    u_xx: np.ndarray
    u_t: np.ndarray
    u_xt: np.ndarray


def traveling_wave(params: PhysicalParams, x, t: float):
    """Exact periodic traveling wave; ``h`` is the total height (includes ``H``)."""
    if params.c is None:
        raise ConfigurationError("traveling wave requires a wave speed c")
    om = params.omega
    s = params.c - params.U
    phase = np.sin(om * (np.asarray(x, dtype=np.float64) - params.c * t))
    h = params.H + (1.0 + phase) / om
    u = params.U + s / (om * params.H) * phase
    return h, u


def traveling_wave_trace(params: PhysicalParams, x, t: float) -> WaveTrace:
    h, u = traveling_wave(params, x, t)
    om, c = params.omega, params.c
    amp = (c - params.U) / (om * params.H)
    arg = om * (np.asarray(x, dtype=np.float64) - c * t)
    sn, cs = np.sin(arg), np.cos(arg)
    return WaveTrace(
        h=h,
        u=u,
        u_x=amp * om * cs,
        u_xx=-amp * om**2 * sn,
        u_t=-amp * om * c * cs,
        u_xt=amp * om**2 * c * sn,
    )


def gaussian_ic(x) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian height bump at rest."""
    x = np.asarray(x, dtype=np.float64)
    return 0.2 * np.exp(-25.0 * x * x), np.zeros_like(x)


# }}}
